"""Tour of the gradient machinery: analytic rules vs finite differences.

Every backward rule in the package is checked against central differences.
This script runs a few of those checks at full precision, then flips a
sign inside one rule on purpose to show the checks actually bite.
"""

import numpy as np

from sopool.verify import (
    elementwise_case,
    maxexp_closed_agreement,
    run_suites,
    spectral_eigen_case,
    sylvester_agreement,
)

rng = np.random.default_rng(7)

print("element-wise backward vs central differences:")
for kind in ("Gamma", "MaxExp", "SigmE-trace"):
    report = elementwise_case(kind, 0.0, rng, dims=(6, 4, 12))
    print(f"  {kind:12s} max rel err {report.max_rel_err:.2e}  "
          f"(h={report.h:g}, passed={report.passed})")

print("\nspectral backward through the eigenbasis:")
for kind in ("MaxExp", "AsinhE"):
    report = spectral_eigen_case(kind, rng, dim=6)
    print(f"  {kind:12s} max rel err {report.max_rel_err:.2e}")

print("\ntwo independent routes to the same square-root gradient:")
gap = sylvester_agreement(rng, dim=6)
print(f"  Sylvester solve vs divided differences: max abs gap {gap:.2e}")

print("\nclosed-form MaxExp backward vs the eigen route and vs differences:")
for eta in (2, 5):
    gap, report = maxexp_closed_agreement(rng, eta, dim=5)
    print(f"  eta={eta}: path gap {gap:.2e}, fd rel err {report.max_rel_err:.2e}")

# now sabotage one backward rule; the suite must catch it
print("\nfault injection (MaxExp backward sign flipped on purpose):")
results, ok = run_suites(suite="gradcheck-elementwise", break_sign=True)
for r in results:
    status = "passed" if r["passed"] else "FAILED, as it should"
    print(f"  {r['suite']}: {status}")
    for line in r.get("failed", [])[:2]:
        print(f"    {line}")
assert not ok, "the fault injection must not go unnoticed"
