"""Optional PNG figures (needs matplotlib, imported on first use)."""
from __future__ import annotations

from pathlib import Path


def _plt():
    try:
        import matplotlib
    except ImportError as exc:
        raise RuntimeError("figures need matplotlib: pip install 'vard[plot]'") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_single(out: Path, cfg, res) -> list[Path]:
    plt = _plt()
    paths = []
    it = [t["iter"] for t in res.trace]

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.plot(it, [t["energy"] for t in res.trace], "k-")
    ax1.set_xlabel("iteration")
    ax1.set_ylabel("energy")
    kk = [(t["iter"], t["kkt"]) for t in res.trace if t["kkt"] == t["kkt"] and t["kkt"] > 0]
    if kk:
        ax2.semilogy(*zip(*kk), "b.-")
    ax2.set_xlabel("iteration")
    ax2.set_ylabel("KKT residual")
    fig.tight_layout()
    paths.append(out / "trace.png")
    fig.savefig(paths[-1], dpi=120)
    plt.close(fig)

    grid = cfg.grid
    if grid.dim == 1 or grid.mode == "radial":
        x = grid.points[:, 0] if grid.mode == "tensor" else grid.radius
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.plot(x, res.u_c.values, "k-")
        ax.set_xlabel("x" if grid.mode == "tensor" else "r")
        ax.set_ylabel("u_c")
        fig.tight_layout()
        paths.append(out / "profile.png")
        fig.savefig(paths[-1], dpi=120)
        plt.close(fig)
    return paths


def render_sweep(out: Path, kind: str, rows) -> Path:
    plt = _plt()
    ok = [r for r in rows if not r.get("error")]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    if kind == "r0":
        ax.loglog([r["value"] for r in ok], [abs(r["R"]) or float("nan") for r in ok], "ko-")
        ax.set_ylabel("|R|")
    else:
        ax.loglog([r["value"] for r in ok], [r["rho_X"] for r in ok], "ko-", label="rho_X(u_c)")
        if kind == "c":
            ax.loglog([r["value"] for r in ok], [r["envelope_looser"] for r in ok], "r--", label="envelope")
            ax.legend()
        ax.set_ylabel("rho_X")
    ax.set_xlabel(kind)
    fig.tight_layout()
    path = out / f"sweep_{kind}.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
