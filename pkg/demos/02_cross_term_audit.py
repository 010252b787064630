"""
Tr (D P + P D)^2 for a unit state: explicit trace against two closed forms.
"""
import numpy as np

from spectral_lab.action import cross_term_quadratic

sigma3 = np.diag([1.0, -1.0])
for psi in ([1.0, 0.0], np.array([1.0, 1.0]) / np.sqrt(2)):
    r = cross_term_quadratic(sigma3, psi)
    print(f"psi = {np.round(psi, 4)}:  lhs = {r.lhs:.6g}   3<D>^2 + <D^2> = {r.paper_rhs:.6g}"
          f"   2<D>^2 + 2<D^2> = {r.derived_rhs:.6g}")

rng = np.random.default_rng(0)
gaps = []
for _ in range(1000):
    n = rng.integers(2, 9)
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    d = (x + x.conj().T) / 2
    r = cross_term_quadratic(d, rng.standard_normal(n) + 1j * rng.standard_normal(n))
    gaps.append((r.derived_discrepancy, r.paper_discrepancy))
gaps = np.abs(np.array(gaps))
print(f"1000 random cases: max |lhs - (2,2) form| = {gaps[:, 0].max():.1e}, "
      f"median |lhs - (3,1) form| = {np.median(gaps[:, 1]):.3g}")
