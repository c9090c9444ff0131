"""Datasets behind the three figure presets, plus their qualitative signatures.

fig1: hyperbolic purification of the maximally mixed state by a constant
      electric field, and a Rabi rotation for contrast.
fig2: combined boost and rotation; parallel fields (loxodrome) and
      perpendicular fields (closed great circle, uneven speed).
fig3: delayed-choice readout with a quadrature sweep 0 -> pi/2 -> 0.
"""
import math
import os

import numpy as np

from .. import pauli
from ..dynamics import ComplexGenerator, propagator, velocity_rates
from ..states import accumulate_worldline
from .config import SimulationConfig
from .io import write_table, write_record
from .kernels import run_batch
from .trajectory import run_trajectory

FIG2_PARALLEL = dict(e=(0.0, 0.0, 1 / 8), b=(0.0, 0.0, -1.0), start=(0.0, 1.0, 0.0))
FIG2_PERPENDICULAR = dict(e=(0.0, 0.0, 2 / 3), b=(-1.0, 0.0, 0.0), start=(0.0, 1.0, 0.0))
ALIGN_WINDOW = 0.1


def deterministic_path(s, gen, dt, steps):
    """Repeated exact group steps under a constant field; returns ``(steps+1, 4)``.

    The state is rescaled by ``1/s0`` whenever it leaves the gauge window;
    the returned log scale undoes that so ``s * exp(ell)`` is the true path.
    """
    R = propagator(gen, dt)
    out = np.empty((steps + 1, 4))
    ell = np.zeros(steps + 1)
    cur = np.asarray(s, dtype=float)
    out[0] = cur
    for k in range(steps):
        cur = pauli.sandwich(R, cur.astype(complex)).real
        ell[k + 1] = ell[k]
        if not 1e-6 <= cur[0] <= 1e6:
            ell[k + 1] += math.log(cur[0])
            cur = cur / cur[0]
        out[k + 1] = cur
    return out, ell


def _path_dataset(s, ell, dt, rule='trapezoid'):
    S = s[:, 1:] / s[:, :1]
    wl = accumulate_worldline(S, dt, rule)
    return {'t': wl.t, 's0': s[:, 0] * np.exp(ell), 's1': s[:, 1] * np.exp(ell),
            's2': s[:, 2] * np.exp(ell), 's3': s[:, 3] * np.exp(ell),
            'Sx': S[:, 0], 'Sy': S[:, 1], 'Sz': S[:, 2],
            'x0': wl.position[:, 0], 'x1': wl.position[:, 1], 'x2': wl.position[:, 2], 'x3': wl.position[:, 3],
            'mean_x': wl.mean[:, 0], 'mean_y': wl.mean[:, 1], 'mean_z': wl.mean[:, 2]}


def fig1(dt=1e-3, duration=3.0, field=1.0):
    steps = int(round(duration / dt))
    boost, ell = deterministic_path([1.0, 0, 0, 0], ComplexGenerator.from_fields(e=(0, 0, field)), dt, steps)
    period = math.pi / field
    rabi_steps = int(round(period / dt))
    rabi, ell_r = deterministic_path([1.0, 1.0, 0, 0], ComplexGenerator.from_fields(b=(0, field, 0)), dt, rabi_steps)
    data = {'boost': _path_dataset(boost, ell, dt), 'rabi': _path_dataset(rabi, ell_r, dt)}
    s0 = data['boost']['s0']
    sig = {'s0_monotone': bool(np.all(np.diff(s0) > 0)),
           'final_abs_Sz': float(abs(data['boost']['Sz'][-1])),
           'rabi_mean_norm': float(np.linalg.norm([data['rabi'][k][-1] for k in ('mean_x', 'mean_y', 'mean_z')]))}
    return data, sig


def pitch_angles(S, gen):
    """Angle between the flow and the local rotation direction ``S x b``."""
    S = np.asarray(S, dtype=float)
    v = np.array([velocity_rates(x, gen) for x in S])
    rot = np.cross(S, gen.b)
    nv = np.linalg.norm(v, axis=1)
    nr = np.linalg.norm(rot, axis=1)
    ok = (nv > 1e-6) & (nr > 1e-6)
    cos = np.sum(v[ok] * rot[ok], axis=1) / (nv[ok] * nr[ok])
    return np.arccos(np.clip(cos, -1, 1))


def fig2(dt=1e-3, duration=4.0):
    data, sig = {}, {}
    par = FIG2_PARALLEL
    gen = ComplexGenerator.from_fields(e=par['e'], b=par['b'])
    steps = int(round(duration / dt))
    s, ell = deterministic_path(np.concatenate([[1.0], par['start']]), gen, dt, steps)
    data['parallel'] = _path_dataset(s, ell, dt)
    ang = pitch_angles(s[:, 1:] / s[:, :1], gen)
    sig['pitch_spread'] = float(np.ptp(ang))
    sig['pitch_angle'] = float(np.mean(ang))
    sig['pitch_expected'] = math.atan(np.linalg.norm(par['e']) / np.linalg.norm(par['b']))

    perp = FIG2_PERPENDICULAR
    gen = ComplexGenerator.from_fields(e=perp['e'], b=perp['b'])
    e, b = np.linalg.norm(perp['e']), np.linalg.norm(perp['b'])
    period = math.pi / math.sqrt(b * b - e * e)
    steps = int(round(period / dt))
    dtp = period / steps
    s, ell = deterministic_path(np.concatenate([[1.0], perp['start']]), gen, dtp, steps)
    d = _path_dataset(s, ell, dtp)
    data['perpendicular'] = d
    S = s[:, 1:] / s[:, :1]
    speed = np.linalg.norm([velocity_rates(x, gen) for x in S], axis=1)
    sig['closure'] = float(np.linalg.norm(S[-1] - S[0]))
    sig['off_plane'] = float(np.max(np.abs(S[:, 0])))
    sig['mean_velocity'] = [float(d['mean_x'][-1]), float(d['mean_y'][-1]), float(d['mean_z'][-1])]
    sig['speed_ratio'] = float(speed.max() / speed.min())
    sig['period'] = period
    return data, sig


def fig3_config(**overrides):
    base = dict(mode='readout', gamma=1.0, dt=1e-3, duration=4.0, delay_q=0.1, delay_r=0.05,
                theta='sweep', initial=[1.0, 0.0, 0.0], seed=3)
    base.update(overrides)
    return SimulationConfig(**base)


def delayed_choice_statistics(cfg, n=200, window=ALIGN_WINDOW):
    """Per-step fluctuation of the transverse and longitudinal state parts.

    Pools the normalized increments ``|d(s1,s2)|/|(s1,s2)|`` and
    ``|d(s3,s0)|/s0`` over ``n`` trajectories, conditioned on the quadrature
    angle that acted on each bin (aligned: chosen ``delay_q`` later) or on the
    angle at the interaction time itself (unaligned).
    """
    cfg = cfg.replace(rescale=False, n=n)
    steps = cfg.n_steps
    perp = np.empty((steps, n))
    lon = np.empty((steps, n))
    prev = {}

    def visit(k, s, ell, out):
        if k > 0:
            p = prev['s']
            tp = np.linalg.norm(p[:, 1:3], axis=1)
            perp[k - 1] = np.linalg.norm(s[:, 1:3] - p[:, 1:3], axis=1) / np.where(tp > 0, tp, 1)
            lon[k - 1] = np.hypot(s[:, 3] - p[:, 3], s[:, 0] - p[:, 0]) / p[:, 0]
        prev['s'] = s.copy()

    run_batch(cfg, range(n), visit)
    sched = cfg.theta_schedule()
    t = np.arange(steps) * cfg.dt
    out = {}
    for label, th in (('aligned', sched(t + cfg.delay_q)), ('unaligned', sched(t))):
        near0 = np.abs(th) < window
        near90 = np.abs(th - math.pi / 2) < window
        v = lambda a, m: float(np.var(a[m].ravel())) if m.any() else math.nan
        out[label] = {
            'perp_ratio': v(perp, near0) / v(perp, near90),
            'lon_ratio': v(lon, near90) / v(lon, near0),
            'bins_near_0': int(near0.sum()), 'bins_near_half_pi': int(near90.sum())}
    return out


def fig3(n=200, **overrides):
    cfg = fig3_config(**overrides)
    rec = run_trajectory(cfg)
    sched = cfg.theta_schedule()
    t = rec.t
    data = {'record': rec,
            'theta_choice': sched(t + cfg.delay_q),
            'theta_at_interaction': sched(t)}
    sig = delayed_choice_statistics(cfg, n)
    return data, sig


def emit_figure_data(preset, out_dir=None, **overrides):
    """Build a preset's datasets; with ``out_dir`` also write them as JSON lines."""
    if preset == 'fig1':
        data, sig = fig1(**overrides)
    elif preset == 'fig2':
        data, sig = fig2(**overrides)
    elif preset == 'fig3':
        data, sig = fig3(**overrides)
    else:
        raise ValueError(f"unknown figure preset {preset!r}")
    files = []
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        for name, d in data.items():
            if name == 'record':
                path = os.path.join(out_dir, f'{preset}_record.jsonl')
                write_record(d, path)
            elif isinstance(d, dict):
                path = os.path.join(out_dir, f'{preset}_{name}.jsonl')
                write_table(path, list(d), list(d.values()), header={'preset': preset, 'panel': name})
            else:
                continue
            files.append(path)
        if preset == 'fig3':
            path = os.path.join(out_dir, 'fig3_theta.jsonl')
            write_table(path, ['t', 'theta_choice', 'theta_at_interaction'],
                        [data['record'].t, data['theta_choice'], data['theta_at_interaction']])
            files.append(path)
    return data, sig, files
