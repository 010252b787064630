"""
Projected extended action on the lepton model with a sterile state, and the
neutrino mass scale kappa v^2 / Lambda.
"""
import numpy as np

from spectral_lab.action import ActionConfig, CutoffFunction, extended_action, perturbative_expansion
from spectral_lab.leptons import (
    LeptonModelParams,
    build_lepton_triple,
    light_neutrino_mass,
    neutrino_mass_estimate,
    physical_projector,
)

p = LeptonModelParams(y_e=0.8, y_nu=0.3, v=1.0, include_sterile=True)
t = build_lepton_triple(p)
psi = np.zeros(t.hilbert_dim, complex)
psi[t.labels.index("nu_L")] = 1.0
psi[t.labels.index("N")] = 0.5

gauss = CutoffFunction("gaussian")
for name, pi in (("full trace", None), ("physical trace", physical_projector(p))):
    cfg = ActionConfig(1.5, gauss, pi)
    coeffs = perturbative_expansion(t, psi, cfg, 4)
    print(f"{name:15s} S_ext = {extended_action(t, psi, cfg):.6f}   Taylor coefficients "
          + " ".join(f"{c:+.5f}" for c in coeffs))

print("\nneutrino mass kappa v^2 / Lambda (kappa = 1, v = 246 GeV):")
for lam in (1e13, 1e15, 1e17, 1.22e19):
    print(f"  Lambda = {lam:.2e} GeV  ->  m = {neutrino_mass_estimate(1.0, 246.0, lam):.3e} eV")

print("\nsee-saw comparison, m_D = 1 GeV:")
for m_r in (1e2, 1e3, 1e4):
    q = LeptonModelParams(y_nu=1.0, v=1.0, include_sterile=True, m_r=m_r)
    print(f"  m_R = {m_r:.0e}: light = {light_neutrino_mass(q):.6e}, m_D^2/m_R = {1 / m_r:.6e}")
