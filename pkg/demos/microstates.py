"""Encode a permutation action as noisy projections and unitaries, then
recover it by rounding, cutting and polar decomposition."""
import numpy as np

from resfin import fixtures
from resfin.errors import ThresholdExceeded
from resfin.matrix import encode_action, extract_finite_action

rng = np.random.default_rng(3)
action = fixtures.random_action(rng, 12, 2)
for noise in (1e-4, 1e-3, 1e-2, 0.2):
    t = encode_action(action, noise, seed=1)
    try:
        ex = extract_finite_action(t)
    except ThresholdExceeded as exc:
        print(f"noise {noise:g}: refused ({exc})")
        continue
    same = ex.label_action.generators == action.generators
    print(f"noise {noise:g}: delta {ex.delta:.2e}, recovered {'exactly' if same else 'up to relabeling'}")
