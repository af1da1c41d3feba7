"""
  Command-line harness: pinsker, kernel, risk, lower-bound, theorem2, accept.
"""

import argparse
import logging
import os
import sys

import colorlog

from .accept import run_suite
from .config import resolve_config
from .const import Command, DensityKind
from .errors import AcceptanceError, ConfigError, PinskerError
from .estimator import (
    exact_mise_for,
    in_class_gaussian,
    in_class_scale,
    minimax_kernel_for,
    monte_carlo_mise,
)
from .grid import Grid, SobolevClass
from .kernel import KernelSpec, kernel_time_domain, pinsker_constant
from .least_favorable import (
    ParameterSet,
    build_f_theta,
    bump_density,
    calibrate_a,
    extremal_theta,
    plateau_density,
    theorem2_sweep,
)
from .prior import (
    lemma1_tail_probability,
    prior_spec,
    van_trees_bound,
    van_trees_closed_form,
)
from .results import ResultTable, grid_function_table, run_metadata
from .rng import RngStream
from .util import parse_flags

LOG = logging.getLogger(__name__)

LOG_FORMAT = "%(log_color)s%(levelname)-8s%(reset)s %(name)s: %(message)s"


def setup_logging(verbose=False):
    """Colored console logging for the CLI."""
    handler = colorlog.StreamHandler()
    handler.setFormatter(colorlog.ColoredFormatter(LOG_FORMAT))
    root = logging.getLogger()
    for old in [h for h in root.handlers if isinstance(h.formatter, colorlog.ColoredFormatter)]:
        root.removeHandler(old)
    root.addHandler(handler)
    root.setLevel(logging.DEBUG if verbose else logging.INFO)


def _pairs(config):
    return [SobolevClass(beta, L) for beta in config.beta for L in config.L]


def _save(table, filename):
    if filename:
        table.write(filename)
        LOG.info("Wrote %s", filename)


def _suffixed(filename, label):
    if not filename:
        return None
    stem, ext = os.path.splitext(filename)
    return "%s-%s%s" % (stem, label, ext or ".csv")


def run_pinsker(config):
    """Pinsker's constant for every (beta, L)."""
    table = ResultTable(["beta", "L", "pinsker_gamma"], metadata=run_metadata(config))
    for sobolev in _pairs(config):
        gamma = pinsker_constant(sobolev)
        table.add_row([sobolev.beta, sobolev.L, gamma])
        print("gamma(beta=%g, L=%g) = %.12g" % (sobolev.beta, sobolev.L, gamma))
    _save(table, config.out)
    return table


def run_kernel(config):
    """Time-domain minimax kernel for sample size n, one x,value file per (beta, L).

    The support is the narrowest one whose tail mass is within
    kernel_tail_tol; padding does not apply to it.
    """
    pairs = _pairs(config)
    tables = []
    for sobolev in pairs:
        spec = KernelSpec.minimax(sobolev, config.n)
        kernel = kernel_time_domain(
            spec, n_points=config.grid_points, tail_tol=config.kernel_tail_tol
        )
        metadata = run_metadata(config)
        metadata.update(
            beta=sobolev.beta, L=sobolev.L, n=config.n, c_min=spec.c, half_width=kernel.support_hi
        )
        table = grid_function_table(kernel, metadata)
        print(
            "beta=%g L=%g n=%d: c_min=%.12g omega_edge=%.12g gamma=%.12g"
            % (
                sobolev.beta,
                sobolev.L,
                config.n,
                spec.c,
                spec.omega_edge,
                pinsker_constant(sobolev),
            )
        )
        if len(pairs) == 1:
            _save(table, config.out)
        else:
            _save(table, _suffixed(config.out, "beta=%g-L=%g" % (sobolev.beta, sobolev.L)))
        tables.append(table)
    return tables


def risk_density(config, sobolev):
    """The density the risk command simulates from."""
    kind = DensityKind(config.density)
    if kind is DensityKind.GAUSSIAN:
        scale = in_class_scale(sobolev)
        grid = Grid.padded(-8.0 * scale, 8.0 * scale, config.padding, config.grid_points)
        return in_class_gaussian(sobolev, grid)
    if kind is DensityKind.BUMP:
        grid = Grid.padded(-0.5, 0.5, config.padding, config.grid_points)
        return bump_density(calibrate_a().a, grid).function
    A = config.A_list[0]
    plateau = plateau_density(float(A), Grid.centered(4.0 * A, config.grid_points))
    parameter_set = ParameterSet(A, sobolev.beta, sobolev.L)
    theta = extremal_theta(parameter_set, 1)
    return build_f_theta(theta, A, plateau, parameter_set).function


def run_risk(config):
    """Monte Carlo and exact MISE of the minimax estimator over n_list."""
    sobolev = SobolevClass(config.beta[0], config.L[0])
    f = risk_density(config, sobolev)
    gamma = pinsker_constant(sobolev)
    exponent = 2 * sobolev.beta / (2 * sobolev.beta + 1)
    stream = RngStream(config.seed)
    table = ResultTable(
        ["n", "mise_mc", "mise_mc_se", "mise_exact", "scaled_risk", "pinsker_gamma"],
        metadata=run_metadata(config),
    )
    for index, n in enumerate(config.n_list):
        kernel = minimax_kernel_for(f, sobolev, n, config.kernel_tail_tol)
        estimate = monte_carlo_mise(
            f,
            sobolev,
            n,
            config.replications,
            stream.child(index),
            kernel,
            config.worker_count,
        )
        exact = exact_mise_for(f, KernelSpec.minimax(sobolev, n), n)
        scaled = n**exponent * estimate.mean
        table.add_row([n, estimate.mean, estimate.std_error, exact, scaled, gamma])
        print(
            "n=%d: MISE %.6g +- %.2g (exact %.6g), scaled %.6g vs gamma %.6g"
            % (n, estimate.mean, estimate.std_error, exact, scaled, gamma)
        )
    _save(table, config.out)
    return table


def run_lower_bound(config):
    """van Trees bound, its closed form and the prior's tail audit at sample size n."""
    beta, L, n = config.beta[0], config.L[0], config.n
    spec = prior_spec(beta, L, n, config.eps, law=config.xi_law, variance_scale=config.variance_scale)
    parameter_set = ParameterSet(spec.A, beta, L)
    bound = van_trees_bound(spec)
    closed = van_trees_closed_form(beta, L, n, config.eps)
    audit = lemma1_tail_probability(
        spec, parameter_set, config.trials, RngStream(config.seed), config.worker_count
    )
    calibration = calibrate_a()
    metadata = run_metadata(config)
    metadata.update(
        calibration_a=calibration.a,
        calibration_bracketed=calibration.bracketed,
        xi_law=repr(spec.xi_law),
        xi_fisher=spec.xi_law.fisher_information(),
    )
    table = ResultTable(
        [
            "n",
            "A",
            "W",
            "active",
            "van_trees",
            "closed_form",
            "ratio",
            "minimax_rate",
            "tail_trials",
            "tail_failures",
            "tail_ci_high",
            "l1_failures",
        ],
        metadata=metadata,
    )
    rate = n ** (-2 * beta / (2 * beta + 1)) * pinsker_constant(SobolevClass(beta, L))
    table.add_row(
        [
            n,
            spec.A,
            spec.W,
            len(spec.ks),
            bound,
            closed,
            bound / closed,
            rate,
            audit.trials,
            audit.failures,
            audit.ci_high,
            audit.l1_failures,
        ]
    )
    print(
        "n=%d A=%d: van Trees %.6g, closed form %.6g (ratio %.6f), %d/%d tail failures"
        % (n, spec.A, bound, closed, bound / closed, audit.failures, audit.trials)
    )
    _save(table, config.out)
    return table


def run_theorem2(config):
    """Probe Theta_A(L) for the largest ||f_theta^(beta)||^2."""
    L = config.L[0]
    stream = RngStream(config.seed)
    metadata = run_metadata(config)
    probes = ResultTable(
        ["beta", "A", "kind", "theta", "l1", "quad", "seminorm_sq"], metadata=metadata
    )
    summary = ResultTable(
        ["beta", "A", "best", "gap", "plateau_term", "plateau_bound", "k_boundary", "n_points"],
        metadata=dict(metadata),
    )
    for index, beta in enumerate(config.beta):
        rows = theorem2_sweep(
            beta,
            L,
            config.A_list,
            config.budget,
            stream.child(index),
            config.worker_count,
            config.padding,
        )
        for row in rows:
            for probe in row.probes:
                probes.add_row(
                    [
                        beta,
                        row.A,
                        probe.kind.value,
                        probe.theta.summary(),
                        probe.l1,
                        probe.quad,
                        probe.seminorm_sq,
                    ]
                )
            summary.add_row(
                [
                    beta,
                    row.A,
                    row.best,
                    row.gap,
                    row.plateau_term,
                    row.plateau_bound,
                    row.k_boundary,
                    row.n_points,
                ]
            )
            print("beta=%g A=%g: best %.8g, gap to L %.3g" % (beta, row.A, row.best, row.gap))
    _save(probes, config.out)
    _save(summary, _suffixed(config.out, "summary"))
    return summary, probes


def run_accept(config):
    """Run an acceptance suite; raise AcceptanceError naming the first failure."""
    results = run_suite(config.suite, config.seed, config.worker_count)
    table = ResultTable(
        ["criterion", "passed", "value", "seconds", "detail"], metadata=run_metadata(config)
    )
    failed = []
    for result in results:
        table.add_row(
            [result.criterion, result.passed, result.value, result.seconds, result.detail]
        )
        status = "ok" if result.passed else "FAILED"
        print("criterion %s: %s (%s)" % (result.criterion, status, result.detail))
        if not result.passed:
            failed.append(result)
    _save(table, config.out)
    if failed:
        raise AcceptanceError(failed[0].criterion, failed[0].detail)
    return table


COMMANDS = {
    Command.PINSKER: run_pinsker,
    Command.KERNEL: run_kernel,
    Command.RISK: run_risk,
    Command.LOWER_BOUND: run_lower_bound,
    Command.THEOREM2: run_theorem2,
    Command.ACCEPT: run_accept,
}

# flag -> (config key, help)
FLAGS = {
    "--seed": ("seed", "master seed"),
    "--workers": ("workers", "worker threads, 0 for all cores"),
    "--grid-points": ("grid_points", "grid size (power of two)"),
    "--padding": ("padding", "support padding factor of the simulated density"),
    "--kernel-tail-tol": ("kernel_tail_tol", "largest kernel mass allowed outside its support"),
    "--out": ("out", "output CSV file"),
    "--beta": ("beta", "smoothness, or comma list"),
    "--L": ("L", "class radius, or comma list"),
    "--n": ("n", "sample size"),
    "--n-list": ("n_list", "comma list of sample sizes"),
    "--reps": ("replications", "Monte Carlo replications"),
    "--eps": ("eps", "prior slack in (0, 1)"),
    "--A-list": ("A_list", "comma list of half-supports"),
    "--budget": ("budget", "probe budget per A"),
    "--trials": ("trials", "prior draws for the tail audit"),
    "--density": ("density", "gaussian, f0 or ftheta"),
    "--xi-law": ("xi_law", "tapered-gaussian or raised-cosine"),
    "--variance-scale": ("variance_scale", "prior variance scale"),
    "--suite": ("suite", "acceptance suite: primary or smoke"),
}


def build_parser():
    """argparse parser with one subcommand per harness command."""
    common = argparse.ArgumentParser(add_help=False)
    for flag, (key, text) in FLAGS.items():
        common.add_argument(flag, dest=key, default=None, help=text)
    common.add_argument("--config", default=None, help="key = value config file")
    common.add_argument("--set", default=None, help="overrides 'key=value, key=value'")
    common.add_argument("--verbose", "-v", action="store_true", default=None)
    parser = argparse.ArgumentParser(prog="pinsker", description=__doc__.strip())
    commands = parser.add_subparsers(dest="command", required=True)
    for command, handler in COMMANDS.items():
        commands.add_parser(command.value, parents=[common], help=handler.__doc__)
    return parser


def main(argv=None):
    """Entry point; returns the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    flags = {key: getattr(args, key) for key, _ in FLAGS.values()}
    if args.set:
        flags.update(parse_flags(args.set))
    flags["command"] = args.command
    flags["verbose"] = args.verbose
    setup_logging(bool(args.verbose))
    try:
        config = resolve_config(flags, args.config)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        LOG.error("%s", exc)
        return 2
    except OSError as exc:
        LOG.error("Cannot read config file: %s", exc)
        return 1
    setup_logging(config.verbose)
    LOG.debug("Resolved config (digest %s):\n%s", config.digest(), config.to_text())
    try:
        COMMANDS[Command(config.command)](config)
    except AcceptanceError as exc:
        LOG.error("%s", exc)
        return 1
    except OSError as exc:
        LOG.error("Cannot write results: %s", exc)
        return 1
    except PinskerError as exc:
        LOG.error("%s failed: %s", config.command, exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
