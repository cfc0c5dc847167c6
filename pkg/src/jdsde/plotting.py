"""Figure rendering for reports (matplotlib, file output only)."""

import math

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.2,
    "lines.markersize": 4,
    "savefig.dpi": 150,
}


def render_convergence(report, filename):
    """Log-log error plot and scaled-error plot side by side."""
    n = [r.n for r in report.rows]
    e = [r.e_hat for r in report.rows]
    se = [r.stderr for r in report.rows]
    with plt.rc_context(STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7.0, 3.0))
        ax1.errorbar(n, e, yerr=[2 * s for s in se], fmt="o-", capsize=2, label=r"$\hat e_n$")
        if report.c_psi > 0 and n:
            ref = [report.c_psi / math.sqrt(k) for k in n]
            ax1.plot(n, ref, "k--", label=r"$C_\psi n^{-1/2}$")
        ax1.set_xscale("log", base=2)
        ax1.set_yscale("log")
        ax1.set_xlabel("n")
        ax1.set_ylabel("error")
        ax1.legend(frameon=False)

        ax2.errorbar(n, [r.sqrt_cost_e for r in report.rows],
                     yerr=[2 * math.sqrt(r.cost_n) * r.stderr for r in report.rows],
                     fmt="o-", capsize=2, label=r"$\mathrm{cost}_n^{1/2}\hat e_n$")
        if report.rows:
            ax2.axhline(report.rows[0].predicted_limit, color="k", ls="--", label="predicted")
        ax2.set_xscale("log", base=2)
        ax2.set_xlabel("n")
        ax2.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(filename, metadata={"Software": None})
        plt.close(fig)


def render_pilot(pilot, density, filename):
    """Pilot estimate of E Y with a 2-stderr band, and the optimal density."""
    t, ey, se = pilot.grid, pilot.ey_hat, pilot.stderr
    with plt.rc_context(STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7.0, 3.0))
        ax1.fill_between(t, ey - 2 * se, ey + 2 * se, color="0.8", lw=0)
        ax1.plot(t, ey, "k-")
        ax1.set_xlabel("t")
        ax1.set_ylabel(r"$E\,\mathcal{Y}(t)$")
        ax2.plot(t, density.pdf(t), "k-")
        ax2.set_xlabel("t")
        ax2.set_ylabel(r"$\psi_0(t)$")
        fig.tight_layout()
        fig.savefig(filename, metadata={"Software": None})
        plt.close(fig)


def render_path(times, x_hat, x_ref, mesh, filename):
    """One approximated trajectory against its reference, knots marked."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 3.0))
        if x_ref is not None:
            ax.plot(times, x_ref, color="0.6", lw=0.8, label="reference")
        ax.plot(times, x_hat, "k-", lw=1.0, label="approximation")
        ax.plot(mesh.knots, x_hat[np.searchsorted(times, mesh.knots)], "k.", label="knots")
        ax.set_xlabel("t")
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(filename, metadata={"Software": None})
        plt.close(fig)
