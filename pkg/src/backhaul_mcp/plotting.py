"""Render sweep CSVs with matplotlib (Agg backend, files only)."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

_STYLE = {
    "unlimited": dict(linestyle="--"),
    "cutset": dict(linestyle="--", color="k", linewidth=0.8),
    "oblivious": dict(linestyle="-"),
    "local_decoding": dict(linestyle="none", marker="o", fillstyle="none"),
    "lowsnr_affine": dict(linestyle=":"),
    "lowsnr_affine_dec": dict(linestyle=":", marker="+"),
}

_SCRIPT = '''\
"""Plot {csv_name}; regenerate the CSV with the backhaul-mcp CLI."""
from pathlib import Path

from backhaul_mcp.plotting import render_csv

here = Path(__file__).resolve().parent
render_csv(here / {csv_name!r}, here / {png_name!r}, xlabel={xlabel!r}, title={title!r})
'''


def plot_script(csv_name: str, png_name: str, xlabel: str, title: str) -> str:
    return _SCRIPT.format(csv_name=csv_name, png_name=png_name, xlabel=xlabel, title=title)


def load_series(csv_path):
    """{scheme: ([x], [rate])}, skipping error rows."""
    from .experiments import read_csv

    series = defaultdict(lambda: ([], []))
    for row in read_csv(csv_path):
        if row["rate_bits"].startswith("ERR:"):
            continue
        xs, ys = series[row["scheme"]]
        xs.append(float(row["axis"]))
        ys.append(float(row["rate_bits"]))
    return dict(series)


def render_csv(csv_path, png_path, xlabel: str = "", title: str = "") -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for scheme, (xs, ys) in sorted(load_series(csv_path).items()):
        style = _STYLE.get(scheme.rsplit(":", 1)[-1], {})
        ax.plot(xs, ys, label=scheme, **style)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("rate [bits/channel use]")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize="small")
    fig.tight_layout()
    png_path = Path(png_path)
    fig.savefig(png_path, dpi=110)
    plt.close(fig)
    return png_path
