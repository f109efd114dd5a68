"""Report figures: face-center pixel coordinates over time, one panel per
camera, with the image-center reference lines."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .sim import Trace  # noqa: E402
from .vision import LEFT, RIGHT  # noqa: E402

_EYE_TITLES = {LEFT: "Left camera", RIGHT: "Right camera"}


def plot_trace(trace: Trace, title: str, out_path: str | Path,
               image_height_px: int = 480) -> Path:
    """Render u(t), v(t) per eye with center reference lines; format follows
    the output extension (SVG by default)."""
    out_path = Path(out_path)
    fig, axes = plt.subplots(2, 1, figsize=(8, 7), sharex=True)
    for ax, eye in zip(axes, (LEFT, RIGHT)):
        recs = trace.per_eye(eye)
        t = [r.t for r in recs]
        u = [r.u if r.valid else math.nan for r in recs]
        v = [r.v if r.valid else math.nan for r in recs]
        ax.plot(t, u, label="X (u)", color="tab:blue")
        ax.plot(t, v, label="Y (v)", color="tab:orange")
        ax.axhline(trace.camera_width_px / 2, color="tab:blue", ls="--",
                   lw=0.8, label="X center")
        ax.axhline(image_height_px / 2, color="tab:orange", ls="--",
                   lw=0.8, label="Y center")
        ax.set_ylabel("pixels")
        ax.set_title(_EYE_TITLES[eye])
        ax.legend(loc="upper right", fontsize=8)
    axes[-1].set_xlabel("time [s]")
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return out_path
