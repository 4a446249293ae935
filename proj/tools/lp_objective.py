#!/usr/bin/env python3
"""Solve an LP-format file with HiGHS and print the optimal objective.

Used by the acceptance suite as an external reference solver. Prints
"optimal <value>" or "status <name>"; exits 3 when highspy is missing.
"""
import sys

try:
    import highspy
except ImportError:
    sys.exit(3)


def main() -> int:
    if len(sys.argv) != 2:
        print("usage: lp_objective.py FILE.lp", file=sys.stderr)
        return 2
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", 0.0)
    h.setOptionValue("mip_abs_gap", 0.0)
    # With big-M rows, a binary at 1 - 1e-7 (inside the default integrality
    # tolerance) times M = 100 already absorbs the epsilon margin of 1e-5.
    h.setOptionValue("mip_feasibility_tolerance", 1e-9)
    h.setOptionValue("primal_feasibility_tolerance", 1e-9)
    if h.readModel(sys.argv[1]) != highspy.HighsStatus.kOk:
        print("status read_error")
        return 1
    h.run()
    status = h.getModelStatus()
    if status != highspy.HighsModelStatus.kOptimal:
        print(f"status {h.modelStatusToString(status)}")
        return 1
    print(f"optimal {h.getInfo().objective_function_value:.17g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
