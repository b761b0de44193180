"""
Unbiased probabilistic quantization
===================================

Each entry is rounded to one of its two neighbouring grid points, with
probabilities chosen so the expected value is the input itself.
"""

# %%
# The exact two-point law
# -----------------------

import numpy as np

from privdsgd import QuantizerSpec, quantize, quantizer_distribution

spec = QuantizerSpec(1.0)
print(quantizer_distribution(2.3, spec))  # 2 w.p. 0.7, 3 w.p. 0.3

# %%
# Sampling agrees with the law
# ----------------------------

draws = quantize(np.full(100_000, 2.3), spec, np.random.default_rng(0))
print("mean", draws.mean(), "P(2)", np.mean(draws == 2.0))

# %%
# A coarser grid costs variance, never bias.

x = np.random.default_rng(1).normal(size=50_000) * 4
for delta in (0.1, 1.0, 5.0):
    q = quantize(x, QuantizerSpec(delta), np.random.default_rng(2))
    print(f"delta={delta:<4} bias={np.mean(q - x):+.4f} mse={np.mean((q - x) ** 2):.4f} (bound {delta**2 / 4})")
