import svmcoreset
from svmcoreset import SolverConfig, SweepSpec
from svmcoreset.enums import ReportFormat


def main():
    ds = svmcoreset.gen_pathological(10_000, seed=3)
    spec = SweepSpec(M=6, trials=10, lam=1.0, solver=SolverConfig(epochs=50), max_workers=4)

    result = svmcoreset.run_sweep(ds, spec)

    print(svmcoreset.report(result, ReportFormat.CSV))
    print("checks:", result.checks)

    svmcoreset.report(result, ReportFormat.JSON, "pathological_sweep.json")


if __name__ == "__main__":
    main()
