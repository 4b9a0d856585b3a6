import logging

import svmcoreset
from svmcoreset import CoresetConfig, SolverConfig
from svmcoreset.data import iter_csv_chunks, running_scaler
from svmcoreset.streaming import StreamingCoreset


def main():
    logging.basicConfig(level=logging.INFO)

    svmcoreset.export_csv(svmcoreset.gen_blobs(50_000, d=4, seed=2), "stream_input.csv")

    # first pass: one scaler so every chunk is standardized the same way
    scaler = running_scaler("stream_input.csv")
    n = int(scaler.n_samples_seen_)

    cfg = CoresetConfig(epsilon=0.2, delta=0.1, solver=SolverConfig(epochs=30), xi=0.0, seed=0)
    leaf = 256

    with StreamingCoreset(leaf, cfg, n_estimate=n) as stream:
        for chunk in iter_csv_chunks("stream_input.csv", 2 * leaf, moments=scaler):
            stream.push_chunk(chunk)

        root = stream.finalize()

    print(root, root.builder["streaming"])


if __name__ == "__main__":
    main()
