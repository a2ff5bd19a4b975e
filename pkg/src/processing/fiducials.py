"""P, Q, S, T fiducial points inside an R-aligned beat window."""

import numpy as np

from src.utils.exceptions import WindowTooNarrow
from src.utils.models import BeatFeatures, BeatFiducials, BeatWindow

# Search ranges in ms relative to R
P_RANGE = (-250.0, -80.0)  # [start, end)
Q_RANGE = (-80.0, 0.0)  # [start, R)
S_RANGE = (0.0, 100.0)  # (R, end]
T_RANGE = (120.0, 420.0)  # [start, end]


def _offset(ms: float, fs: float) -> int:
    return round(ms * fs / 1000.0)


def locate_fiducials(beat: BeatWindow, fs: float | None = None) -> BeatFiducials:
    """Locate the five peaks of one beat.

    Q and S are the minima just before and after R, P the maximum ahead of Q, and T
    the sample of largest absolute deviation from the window median, so inverted
    T waves are found as well.

    Raises:
        WindowTooNarrow: If the window does not cover [-250 ms, +420 ms] around R
    """
    rate = fs or beat.fs
    x = beat.samples
    r = beat.r_offset
    p_lo, p_hi = (r + _offset(ms, rate) for ms in P_RANGE)
    q_lo = r + _offset(Q_RANGE[0], rate)
    s_hi = r + _offset(S_RANGE[1], rate)
    t_lo, t_hi = (r + _offset(ms, rate) for ms in T_RANGE)

    if p_lo < 0 or t_hi >= x.size or p_hi <= p_lo or q_lo >= r:
        raise WindowTooNarrow(
            f"window of {x.size} samples (R at {r}) does not span "
            f"[{P_RANGE[0]:.0f}, +{T_RANGE[1]:.0f}] ms at {rate} Hz"
        )

    q = q_lo + int(np.argmin(x[q_lo:r]))
    s = r + 1 + int(np.argmin(x[r + 1 : s_hi + 1]))
    p = p_lo + int(np.argmax(x[p_lo:p_hi]))
    t_segment = x[t_lo : t_hi + 1]
    t = t_lo + int(np.argmax(np.abs(t_segment - np.median(x))))

    def ms(index: int) -> float:
        return (index - r) * 1000.0 / rate

    return BeatFiducials(
        t_p=ms(p),
        t_q=ms(q),
        t_s=ms(s),
        t_t=ms(t),
        a_p=float(x[p]),
        a_q=float(x[q]),
        a_r=float(x[r]),
        a_s=float(x[s]),
        a_t=float(x[t]),
    )


def beat_features(f: BeatFiducials) -> BeatFeatures:
    """The nine per-beat features; R's time is omitted since it is always zero."""
    return BeatFeatures(f.t_p, f.t_q, f.t_s, f.t_t, f.a_p, f.a_q, f.a_r, f.a_s, f.a_t)
