"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 I/O error. All output files
are rendered in memory first and then moved into place, so a failed command
leaves no partial results behind.
"""
import argparse
import logging
import os
import sys
import tempfile

from . import reports
from .config import experiment_to_dict, load_experiment, preset
from .exceptions import ConfigError, InvalidArgumentError
from .harness import run_sweep
from .plotting import render_rates_svg

__all__ = ["main", "cmd_run", "cmd_quantization_report", "cmd_figures"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3

logger = logging.getLogger("hybridrf")


def _write_all(files):
    """Write ``{path: text}`` atomically per file; on failure remove what was written."""
    done = []
    try:
        for path, text in files.items():
            directory = os.path.dirname(os.path.abspath(path))
            fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
            try:
                with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                    fh.write(text)
                os.replace(tmp, path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise
            done.append(path)
    except BaseException:
        for path in done:
            try:
                os.unlink(path)
            except OSError:
                pass
        raise


def _check_out_dir(out_dir):
    # Fail before a long computation, but create nothing until it finishes.
    probe = os.path.abspath(out_dir)
    while not os.path.exists(probe):
        probe = os.path.dirname(probe)
    if not os.path.isdir(probe):
        raise NotADirectoryError(f"{probe} is not a directory")
    if not os.access(probe, os.W_OK):
        raise PermissionError(f"{probe} is not writable")


def _run_experiment(experiment, out_dir, workers=None, title=None):
    _check_out_dir(out_dir)
    curves = run_sweep(experiment.sim, workers or experiment.workers)
    os.makedirs(out_dir, exist_ok=True)
    files = {
        os.path.join(out_dir, "results.csv"): reports.results_csv(curves),
        os.path.join(out_dir, "results.json"): reports.results_json(
            curves, experiment_to_dict(experiment)
        ),
    }
    if experiment.plot:
        sim = experiment.sim
        title = title or f"Nt={sim.nt}, Nr={sim.nr}, Ntrx={sim.ntrx}, Ns={sim.ns}"
        files[os.path.join(out_dir, "rates.svg")] = render_rates_svg(curves, title)
    _write_all(files)
    return curves


def _guard(fn):
    try:
        fn()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidArgumentError as exc:
        print(f"config error: line 1: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_run(config_path, output_dir, workers=None):
    """Run the sweep described by ``config_path`` and write results into ``output_dir``."""
    def go():
        experiment = load_experiment(config_path)
        _run_experiment(experiment, output_dir, workers)
    return _guard(go)


def cmd_quantization_report(config_path, output_path):
    """Write the quantization-error table for the configured ``(nt, ntrx)`` pairs."""
    def go():
        experiment = load_experiment(config_path)
        rows = reports.quantization_rows(experiment.quantization, experiment.sim.losses)
        parent = os.path.dirname(os.path.abspath(output_path))
        if not os.path.isdir(parent):
            raise FileNotFoundError(f"output directory {parent} does not exist")
        _write_all({output_path: reports.quantization_csv(rows)})
    return _guard(go)


def cmd_figures(name, output_dir, scale=1.0, trials=None, seed=None,
                caption_ntrx=False, workers=None):
    """Run a built-in figure configuration and write CSV, JSON and SVG."""
    def go():
        experiment = preset(name, scale, trials, seed, caption_ntrx)
        sim = experiment.sim
        title = f"{name}: Nt={sim.nt}, Nr={sim.nr}, Ntrx={sim.ntrx}"
        _run_experiment(experiment, output_dir, workers, title)
    return _guard(go)


def _u64(text):
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hybridrf", description="Hybrid precoding rate simulations."
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a sweep from a JSON experiment file")
    p.add_argument("config")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--workers", type=_positive_int, help="override the config's worker count")

    p = sub.add_parser("quantization-report", help="tabulate RFPN quantization error")
    p.add_argument("config")
    p.add_argument("--out", required=True, help="output CSV file")

    p = sub.add_parser("figures", help="run a built-in figure configuration")
    p.add_argument("preset", choices=("fig2", "fig3", "fig4"))
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--scale", type=float, default=1.0, help="shrink Nt by this factor, in (0, 1]")
    p.add_argument("--trials", type=_positive_int)
    p.add_argument("--seed", type=_u64)
    p.add_argument("--caption-ntrx", action="store_true",
                   help="fig4 only: use Ntrx=2 instead of the default 8")
    p.add_argument("--workers", type=_positive_int, default=1)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "run":
        return cmd_run(args.config, args.out, args.workers)
    if args.command == "quantization-report":
        return cmd_quantization_report(args.config, args.out)
    return cmd_figures(args.preset, args.out, args.scale, args.trials, args.seed,
                       args.caption_ntrx, args.workers)


if __name__ == "__main__":
    sys.exit(main())
