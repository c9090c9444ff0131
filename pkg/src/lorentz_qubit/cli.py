"""Command line front end.

Exit codes: 0 success, 1 configuration error, 2 invariant or verification
failure, 3 numeric failure.
"""
import argparse
import json
import sys

from .engine import (SimulationConfig, ConfigError, InvariantError, NumericError, load_config,
                     from_dict, run_trajectory, run_ensemble, verify_invariants, emit_figure_data)
from .engine.io import write_record, write_table
from .readout import ScheduleError


def _theta_arg(text):
    try:
        return float(text)
    except ValueError:
        return text


def _add_common(p):
    p.add_argument('--config', help='JSON config file')
    p.add_argument('--seed', type=int)
    p.add_argument('--mode', choices=('exact', 'sme', 'charge-field', 'readout'))
    p.add_argument('--theta', type=_theta_arg, help='preset name, constant angle, or sampled-series file')
    p.add_argument('--gamma', type=float)
    p.add_argument('--dt', type=float)
    p.add_argument('--steps', type=int)
    p.add_argument('--n', type=int)
    p.add_argument('--out', help="output path ('-' or omitted: stdout)")
    p.add_argument('--format', choices=('jsonl', 'csv'))


def build_parser():
    parser = argparse.ArgumentParser(prog='lorentz-qubit', description='Qubit measurement trajectories as Lorentz motion.')
    sub = parser.add_subparsers(dest='command', required=True)
    for name, text in (('simulate', 'single trajectory record'),
                       ('ensemble', 'ensemble mean Bloch vector with standard errors'),
                       ('readout', 'single trajectory in dispersive readout mode')):
        _add_common(sub.add_parser(name, help=text))
    v = sub.add_parser('verify', help='run the invariant battery')
    v.add_argument('--seed', type=int, default=0)
    v.add_argument('--out', help='write the JSON report here instead of stdout')
    v.add_argument('--throughput', action='store_true', help='also time the exact-mode kernel')
    f = sub.add_parser('figures', help='emit figure datasets')
    f.add_argument('preset', choices=('fig1', 'fig2', 'fig3'))
    f.add_argument('--out', required=True, help='output directory')
    f.add_argument('--set', action='append', default=[], metavar='KEY=VALUE',
                   help='preset override; VALUE is parsed as JSON when possible')
    return parser


def make_config(args, **forced):
    d = load_config(args.config).to_dict() if args.config else {}
    for key in ('seed', 'mode', 'theta', 'gamma', 'dt', 'steps', 'n', 'out', 'format'):
        val = getattr(args, key, None)
        if val is not None:
            d[key] = val
    d.update(forced)
    return from_dict(d)


def _parse_override(item):
    key, sep, val = item.partition('=')
    if not sep:
        raise ConfigError(f"override {item!r}: expected KEY=VALUE")
    try:
        return key, json.loads(val)
    except json.JSONDecodeError:
        return key, val


def _emit(text, path):
    if path in (None, '-'):
        sys.stdout.write(text)


def cmd_simulate(args, **forced):
    cfg = make_config(args, **forced)
    rec = run_trajectory(cfg)
    _emit(write_record(rec, cfg.out, cfg.format), cfg.out)


def cmd_ensemble(args):
    cfg = make_config(args)
    summ = run_ensemble(cfg)
    cols = ['t', 'mean_x', 'mean_y', 'mean_z', 'se_x', 'se_y', 'se_z']
    arrays = [summ.t, *summ.mean.T, *summ.se.T]
    header = {'config_hash': cfg.config_hash(), 'seed': cfg.seed, 'mode': cfg.mode, 'n': summ.n,
              'decay_rate': summ.decay_rate, 'decay_ci95': summ.decay_ci, 'config': cfg.to_dict()}
    if cfg.out not in (None, '-'):
        write_table(cfg.out, cols, arrays, header)
    print(json.dumps({'n': summ.n, 'decay_rate': summ.decay_rate, 'decay_ci95': summ.decay_ci,
                      'seed': cfg.seed, 'config_hash': cfg.config_hash()}))


def cmd_verify(args):
    rep = verify_invariants(seed=args.seed, throughput=args.throughput)
    text = json.dumps(rep.to_dict(), indent=2) + '\n'
    if args.out:
        with open(args.out, 'w') as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if rep.passed else 2


def cmd_figures(args):
    overrides = dict(_parse_override(item) for item in args.set)
    try:
        _, sig, files = emit_figure_data(args.preset, args.out, **overrides)
    except TypeError as exc:
        raise ConfigError(f"figures: {exc}") from exc
    print(json.dumps({'preset': args.preset, 'files': files, 'signatures': sig}, default=float))


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == 'simulate':
            cmd_simulate(args)
        elif args.command == 'readout':
            cmd_simulate(args, mode='readout')
        elif args.command == 'ensemble':
            cmd_ensemble(args)
        elif args.command == 'verify':
            return cmd_verify(args)
        else:
            cmd_figures(args)
    except (ConfigError, ScheduleError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except InvariantError as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return 2
    except (NumericError, FloatingPointError, OverflowError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == '__main__':
    sys.exit(main())
