import svmcoreset
from svmcoreset import CoresetConfig, SolverConfig


def main():
    ds = svmcoreset.gen_blobs(20_000, d=5, separation=3.0, seed=1)
    solver = SolverConfig(epochs=50, lam=0.5)

    coreset = svmcoreset.build_coreset(ds, CoresetConfig(epsilon=0.2, delta=0.1, lam=0.5, solver=solver, seed=7))
    print(coreset, coreset.builder["sensitivity"])

    # train on the coreset, evaluate on everything
    w_small, _ = coreset.train(solver)
    w_full, f_full = svmcoreset.approx_svm(ds, solver)

    ctx = svmcoreset.ObjectiveContext.for_dataset(ds, 0.5)
    print(f"F(P, w_coreset) = {svmcoreset.svm_objective(ds, w_small, ctx):.6g}, F(P, w_full) = {f_full:.6g}")

    coreset.to_csv("blobs_coreset.csv")


if __name__ == "__main__":
    main()
