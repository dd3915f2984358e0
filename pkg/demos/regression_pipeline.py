"""Regression walkthrough: noisy numeric labelers, no ground truth.

Five labelers emit numbers correlated with a latent value. Pairwise product
moments alone identify each labeler's true correlation (the triplet trick),
and the conditional-mean aggregate beats naive averaging.

Run:  python3 demos/regression_pipeline.py
"""

import numpy as np

from uws import SecondMomentPrior, aggregate_dataset, learn_label_model
from uws import synthetic as syn

SEED = 21
acc = np.array([0.9, 0.7, 0.5, 0.3, 0.1])  # covariance of each labeler with the truth
noise = np.array([0.2, 0.4, 0.6, 0.9, 1.2])
cov = np.outer(acc, acc) + np.diag(noise)

scenario = syn.RegressionScenario(
    n=10_000, accuracies=tuple(acc), lf_cov=tuple(map(tuple, cov)), prior_var=1.0, seed=SEED
)
truth, data = syn.gen_regression_tasks(scenario)
print(f"{data.n_lfs} labelers x {data.n_tasks} tasks")

print("\n== learn accuracies without the truth ==")
model = learn_label_model(data, prior=SecondMomentPrior(1.0))
print("true  truth-labeler covariances:", acc)
print("learned          (triplet path):", np.round(model.accuracies, 3))

print("\n== aggregate ==")
lam = data.labels[:, :, 0]
mse_mean = np.mean((lam.mean(axis=1) - truth) ** 2)
weighted = np.asarray(aggregate_dataset(data, rule="weighted", model=model))
mse_weighted = np.mean((weighted - truth) ** 2)
print(f"plain average        : MSE = {mse_mean:.4f}")
print(f"conditional mean     : MSE = {mse_weighted:.4f}")
print(f"best single labeler  : MSE = {min(np.mean((lam[:, a] - truth) ** 2) for a in range(5)):.4f}")
print("\nthe learned model downweights the labelers that barely track the truth.")
