import svmcoreset
from svmcoreset import SolverConfig


def main():
    # two far apart clusters plus two opposite-label points next to each other
    ds = svmcoreset.gen_pathological(2000, seed=0)
    a, b = ds.metadata["close_pair"]

    table = svmcoreset.compute_sensitivities(ds, lam=1.0, seed=0, solver=SolverConfig(epochs=50))

    print(f"t = {table.t:.4g}, closed form bound = {table.bound:.4g}")
    print(f"q of the close pair: {table.q[a]:.4g}, {table.q[b]:.4g} (uniform would be {1 / ds.n:.4g})")

    hits = {"uniform": 0, "coreset": 0}

    for seed in range(100):
        uniform = svmcoreset.uniform_coreset(ds, 50, seed=seed)
        sampled = svmcoreset.importance_sample(ds, table, 50, seed=seed)

        hits["uniform"] += int({a, b} & set(uniform.ids.tolist()) != set())
        hits["coreset"] += int({a, b} & set(sampled.ids.tolist()) != set())

    print(f"draws of 50 that contain the pair, out of 100: {hits}")


if __name__ == "__main__":
    main()
