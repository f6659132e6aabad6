# %% [markdown]
# # Gradient stabilization by feedback
#
# The benchmark is `d^2/dx^2 + pi^2` on (0, 1) with Dirichlet conditions and
# initial state `y0 = x^2 (x - 1)`. Its first eigenvalue is 0, so the gradient
# does not decay on its own. The feedback `v = -pi^2 y` shifts every mode by
# `-pi^2`, giving closed-loop eigenvalues `-n^2 pi^2`.
#
# This script prints the data behind three plots: the initial state, the
# state and its gradient at t = 0.9, 2, 6, 15 for q = 0.9, and the state at
# t = 20 for several q. If matplotlib is installed it also saves them as PNG.

# %%
import math
from pathlib import Path

import numpy as np

from gradstab import (
    benchmark_feedback,
    benchmark_initial_state,
    benchmark_system,
    closed_loop,
    evolve_homogeneous,
    project_initial_state,
    run_algorithm,
    sample_field,
    sample_gradient_field,
)

system = benchmark_system(64)
fb = benchmark_feedback(64)
y0 = benchmark_initial_state()
cl = closed_loop(system, fb)
c0 = project_initial_state(system, y0)
x = np.linspace(0.0, 1.0, 101)

print("closed-loop eigenvalues / pi^2:", (cl.eigenvalues[:4] / math.pi**2).round(12))
print("max |reconstructed y0 - y0| on 101 points:", np.abs(sample_field(system, c0, x) - y0(x)).max())

# %% [markdown]
# ## Snapshots for q = 0.9

# %%
snap_t = [0.9, 2.0, 6.0, 15.0]
traj = evolve_homogeneous(cl, c0, 0.9, snap_t)
for t, a in zip(traj.times, traj.coeffs):
    y = sample_field(cl, a, x)
    gy = sample_gradient_field(cl, a, x)
    print(f"t = {t:4}: max|y| = {np.abs(y).max():.3e}  max|y_x| = {np.abs(gy).max():.3e}")

# %% [markdown]
# ## The stopping rule
#
# The algorithm reports the first grid time at which `||grad y||` falls below
# epsilon. With epsilon = 5e-3 this happens already around t = 1 under the
# L2 gradient norm.

# %%
rep = run_algorithm(system, fb, y0, 0.9, 5e-3)
print("terminated:", rep.terminated, " t_hit:", rep.t_hit, " norm there:", rep.final_gradient_norm)
i15 = int(np.flatnonzero(rep.trajectory.times == 15.0)[0])
print("||grad y(15)|| =", rep.gradient_norms[i15])

# %% [markdown]
# ## Effect of the fractional order at t = 20

# %%
finals = {}
for q in (0.79, 0.5, 0.23):
    a = evolve_homogeneous(cl, c0, q, [20.0]).coeffs[0]
    finals[q] = sample_field(cl, a, x)
    print(f"q = {q}: max|y(20)| = {np.abs(finals[q]).max():.3e}")

# %%
try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    out = Path(__file__).with_name("output")
    out.mkdir(exist_ok=True)
    fig, ax = plt.subplots()
    ax.plot(x, y0(x))
    ax.set(xlabel="x", ylabel="y0", title="initial state")
    fig.savefig(out / "initial_state.png", dpi=120)
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for t, a in zip(traj.times, traj.coeffs):
        axes[0].plot(x, sample_field(cl, a, x), label=f"t={t:g}")
        axes[1].plot(x, sample_gradient_field(cl, a, x), label=f"t={t:g}")
    axes[0].set(title="y(x, t), q = 0.9")
    axes[1].set(title="grad y(x, t), q = 0.9")
    axes[0].legend()
    fig.savefig(out / "snapshots_q09.png", dpi=120)
    fig, ax = plt.subplots()
    for q, y in finals.items():
        ax.plot(x, y, label=f"q={q}")
    ax.set(title="y(x, 20)")
    ax.legend()
    fig.savefig(out / "final_states.png", dpi=120)
    print("figures written to", out)
