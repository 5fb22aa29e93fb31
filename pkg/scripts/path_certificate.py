"""Run the branch-and-prune certificate end to end and print the verdict."""

from __future__ import annotations

import argparse

from cliquequery.certopt import verify_path_certificate


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--slack", type=float, default=0.1)
    ap.add_argument("--eps-target", type=float, default=None,
                    help="stop refining at this box width (default: slack / L3)")
    ap.add_argument("--audit-points", type=int, default=100_000)
    ap.add_argument("--gamma-samples", type=int, default=512)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    report = verify_path_certificate(
        slack=args.slack, eps_target=args.eps_target,
        audit_points=args.audit_points, gamma_samples=args.gamma_samples,
        seed=args.seed)

    for lv in report.phase1.levels:
        print(f"level {lv.level}: eps={lv.eps:g} boxes={lv.boxes} "
              f"pruned={lv.pruned_infeasible} eliminated={lv.eliminated} "
              f"surviving={lv.surviving}")
    print(f"survivors={report.phase1.n_survivors} screened={report.screened} "
          f"refined={len(report.phase2)}")
    print(f"gamma_residual={report.gamma_residual:.3e} "
          f"v_residual={report.v_residual:.3e}")
    print(f"audit: eliminated_points={report.audit.eliminated_points} "
          f"threshold_violations={report.audit.threshold_violations} "
          f"pruned_feasible_found={report.audit.pruned_feasible_found}")
    print(report.statement)
    print(f"certified={report.certified} elapsed={report.elapsed:.1f}s")
    return 0 if report.certified else 1


if __name__ == "__main__":
    raise SystemExit(main())
