"""Walkthrough: MC-dropout predictive mean and uncertainty.

The fusion network keeps dropout active at inference.  Averaging many
masked passes gives the predictive mean; their population variance is
the uncertainty, which collapses to zero when dropout is off.  Run:

    python3 demos/03_uncertainty.py
"""

import numpy as np

from fusionet.sffn import (
    SffnModel,
    TrainConfig,
    forward_deterministic,
    gradient_check,
    predict_mc,
    train_sffn,
)

rng = np.random.default_rng(0)
X = rng.normal(0.0, 1.0, size=(240, 2))
y = (X[:, 0] + 0.3 * X[:, 1] < 0).astype(int)
model = train_sffn(X, y, TrainConfig(epochs=80, seed=1, dropout=0.2))

print("input            label  v_p(real)  v_p(fake)  uncertainty (per class)")
for x in (np.array([2.0, 0.0]), np.array([0.05, 0.0]), np.array([-2.0, 0.0])):
    up = predict_mc(model, x, n_passes=200, base_seed=7)
    print(f"{str(x):16s} {up.label:5s}  {up.v_p.p_real:.4f}     {up.v_p.p_fake:.4f}"
          f"     ({up.c_u[0]:.5f}, {up.c_u[1]:.5f})")
print("-> the borderline input carries visibly higher variance")

# with the dropout rate at zero every pass is identical
frozen = SffnModel(weights=model.weights, biases=model.biases, dropout=0.0)
up = predict_mc(frozen, np.array([0.05, 0.0]), n_passes=200, base_seed=7)
det = forward_deterministic(frozen, np.array([0.05, 0.0]))
print(f"\ndropout off: c_u={up.c_u}, v_p == deterministic pass: {up.v_p == det}")

# the trainer's backpropagation is checked against finite differences
report = gradient_check(model, np.array([0.4, -0.2]), "real")
print(f"gradient check, max relative error: {report.max_rel_error:.2e}")
