#!/usr/bin/env python3
"""LP backend wrapper: solve a CPLEX-LP file with HiGHS and write its raw solution.

Usage: highs_backend.py MODEL.lp SOLUTION.sol

HUBOPT_HIGHS_SOLVER selects the HiGHS algorithm (default ipm, always with crossover).
"""
import os
import sys

import highspy


def main() -> int:
    if len(sys.argv) != 3:
        print(__doc__, file=sys.stderr)
        return 2
    model, solution = sys.argv[1], sys.argv[2]
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    for opt in ("primal_feasibility_tolerance", "dual_feasibility_tolerance"):
        h.setOptionValue(opt, 1e-9)
    h.setOptionValue("solver", os.environ.get("HUBOPT_HIGHS_SOLVER", "ipm"))
    h.setOptionValue("run_crossover", "on")
    if h.readModel(model) == highspy.HighsStatus.kError:
        print(f"cannot read {model}", file=sys.stderr)
        return 1
    h.run()
    status = h.getModelStatus()
    if status == highspy.HighsModelStatus.kUnboundedOrInfeasible:
        # Presolve could not tell the two apart; settle it with plain simplex.
        h.setOptionValue("presolve", "off")
        h.setOptionValue("solver", "simplex")
        h.run()
        status = h.getModelStatus()
    print(h.modelStatusToString(status), file=sys.stderr)
    h.writeSolution(solution, 0)
    return 0


if __name__ == "__main__":
    sys.exit(main())
