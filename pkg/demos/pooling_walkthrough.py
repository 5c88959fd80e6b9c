"""Pool a toy feature grid and watch each normalizer reshape the statistics.

Runs in well under a second. The story: co-occurrence pooling squares the
dynamic range of feature activations, so a feature that fires often (a
"bursty" one) dominates the pooled matrix. Every normalizer in the family
compresses strong entries back toward the weak ones, each with its own
curve.
"""

import numpy as np

from sopool.aggregate import (
    FeatureBatch,
    augment,
    cooc_matrix,
    rectify_center,
    trace_normalize,
)
from sopool.elementwise import KINDS, PNConfig, pn_fwd
from sopool.errors import DomainError
from sopool.kernelmap import encode_grid, make_pivots
from sopool.linalg import sym_eig

rng = np.random.default_rng(0)

# a 4x4 grid of 6-dim feature columns, as if sliced out of a conv map
d, H, W = 6, 4, 4
Phi = np.maximum(rng.standard_normal((d, H * W)), 0.0)

# make feature 2 bursty: it fires in ten of the sixteen locations
Phi[2, :10] = 1.5

# location codes: Z Gaussian bumps per axis, appended below the features
grid = make_pivots(3)
codes = encode_grid(W, H, 1.0, grid)
print(f"features {Phi.shape}, location codes {codes.shape}")

batch = rectify_center(FeatureBatch(Phi=Phi), beta=0.0)
aug = augment(batch, codes)
M = cooc_matrix(aug)
print(f"pooled co-occurrence matrix {M.M.shape}, trace {M.traceval:.4f}")

pair = sym_eig(trace_normalize(M))
print("top eigenvalues after trace normalization:", np.round(pair.values[:4], 4))

# the bursty feature towers over a quiet one on the raw diagonal
bursty, quiet = M.M[2, 2], M.M[4, 4]
print(f"\nraw diagonal: bursty {bursty:.4f} vs quiet {quiet:.4f} "
      f"(ratio {bursty / quiet:.1f})")

print("\nhow each normalizer compresses that ratio:")
for kind in KINDS:
    Psi = pn_fwd(M, PNConfig(kind=kind))
    print(f"  {kind:12s} bursty {Psi[2, 2]:.4f}  quiet {Psi[4, 4]:.4f}  "
          f"ratio {Psi[2, 2] / Psi[4, 4]:.2f}")

# beta-centering subtracts half the per-feature mean after rectification,
# so matrix entries can go negative (mutual absence becomes evidence)
centered = cooc_matrix(augment(rectify_center(FeatureBatch(Phi=Phi), beta=0.5), codes))
print(f"\nwith beta=0.5 centering, min entry {centered.M.min():.4f}")

# the probability-flavored normalizers refuse negative entries outright
try:
    pn_fwd(centered, PNConfig(kind="MaxExp"))
except DomainError as exc:
    print("MaxExp on centered input:", exc)

# the sigmoid-shaped ones accept them
Psi = pn_fwd(centered, PNConfig(kind="SigmE", beta=0.5))
print(f"SigmE handles it fine: entries in [{Psi.min():.4f}, {Psi.max():.4f}]")
