"""
Counting function of the circle Dirac spectrum n + 1/2 and its linear growth.
"""
import numpy as np

from spectral_lab.action import ActionConfig, CutoffFunction, bosonic_action, circle_spectrum, weyl_scan, weyl_slope

spec = circle_spectrum(-5000, 5000)
grid = np.linspace(10, 40, 7)
for lam, n in zip(grid, weyl_scan(spec, grid)):
    print(f"Lambda = {lam:5.1f}   N(Lambda) = {n}")
print("least-squares slope on [10, 40]:", round(weyl_slope(spec, 10, 40), 4))

# With a smooth cutoff the action grows like the same leading term, 2 * Lambda * integral
d = np.diag(circle_spectrum(-400, 399))
for lam in (10.0, 20.0, 40.0):
    s = bosonic_action(d, ActionConfig(lam, CutoffFunction("gaussian")))
    print(f"Lambda = {lam:4.0f}   Tr exp(-D^2/Lambda^2) / Lambda = {s / lam:.6f}   (sqrt(pi) = {np.sqrt(np.pi):.6f})")
