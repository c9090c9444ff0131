"""Single-trajectory runs and their record format."""
from dataclasses import dataclass
import math

import numpy as np

from .. import __version__
from .config import InvariantError
from .kernels import run_batch

BASE_COLUMNS = ('t', 'theta', 'r', 'dW', 's0', 's1', 's2', 's3', 'ell', 'Sx', 'Sy', 'Sz')
CONSISTENCY_TOL = 1e-10


@dataclass
class TrajectoryRecord:
    header: dict
    columns: tuple
    data: np.ndarray          # (rows, len(columns)); NaN marks an empty cell

    def column(self, name):
        return self.data[:, self.columns.index(name)]

    @property
    def t(self):
        return self.column('t')

    @property
    def s(self):
        return self.data[:, 4:8]

    @property
    def bloch(self):
        return self.data[:, 9:12]

    @property
    def log_scale(self):
        return self.column('ell')

    def check_consistency(self, tol=CONSISTENCY_TOL):
        """Bloch columns must equal ``s/s0`` to ``tol``."""
        S = self.s[:, 1:] / self.s[:, :1]
        err = float(np.max(np.abs(S - self.bloch)))
        if err > tol:
            raise InvariantError(f"s and S columns disagree by {err:.3e}")
        return err


def make_header(cfg, columns):
    return {'config_hash': cfg.config_hash(), 'seed': cfg.seed, 'mode': cfg.mode,
            'version': __version__, 'columns': list(columns), 'config': cfg.to_dict()}


def run_trajectory(cfg, index=0):
    """Simulate trajectory ``index`` of ``cfg``'s seed family, one row per grid point.

    Row ``k`` holds the state at ``t_k`` and the record of the bin that
    ended there; row 0 has no record.
    """
    rows = []

    def visit(k, s, ell, out):
        rows.append((k, s[0].copy(), float(ell[0]), out))

    stepper = run_batch(cfg, [index], visit)
    columns = BASE_COLUMNS + stepper.extra_columns
    data = np.full((len(rows), len(columns)), math.nan)
    for i, (k, s, ell, out) in enumerate(rows):
        data[i, 0] = k * cfg.dt
        data[i, 4:8] = s
        data[i, 8] = ell
        data[i, 9:12] = s[1:] / s[0]
        if out is None:
            data[i, 1] = stepper.theta_at(0.0)
            continue
        data[i, 1] = out.theta[0]
        data[i, 2] = out.r[0]
        data[i, 3] = out.dW[0]
        for j, name in enumerate(stepper.extra_columns):
            data[i, 12 + j] = out.extra[name][0]
    rec = TrajectoryRecord(make_header(cfg, columns), columns, data)
    rec.check_consistency()
    return rec
