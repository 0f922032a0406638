#!/usr/bin/env python3
import functools
import json
import os
import sys
from datetime import datetime
from typing import Any, Callable, Dict, List, Optional, Tuple

import click
import numpy as np
from pydantic import ValidationError

from .bounds import figure_data
from .channels import apply_channel, apply_classical_noise, output_cutoff
from .config import configure_logging
from .entropies import (
    husimi,
    renyi_entropy,
    renyi_wehrl,
    renyi_wehrl_converged,
    von_neumann,
    wehrl,
    wehrl_converged,
)
from .errors import (
    ConjectureViolationError,
    ConvergenceError,
    IdentityViolationError,
    InvalidParameterError,
    TruncationError,
)
from .fock_core import (
    coherent_cutoff,
    coherent_state,
    density_from_pure,
    embed,
    fock_state,
    pure_state,
    support_dim,
    thermal_cutoff,
    thermal_state,
)
from .minimizer import minimize_gaussian, minimize_output_renyi, minimize_output_wehrl
from .models import ChannelSpec, ClassicalNoiseSpec, DensityOperator, ThermalNoiseSpec
from .report_generator import ReportGenerator
from .theta_multimode import verify_theta

EXIT_VALIDATION = 2
EXIT_CONVERGENCE = 3
EXIT_VIOLATION = 4


def output_options(command: Callable) -> Callable:
    """--json, --quiet and --verbose shared by every subcommand"""
    command = click.option(
        "--verbose", "-v", is_flag=True, help="Log at DEBUG level"
    )(command)
    command = click.option(
        "--quiet", "-q", is_flag=True, help="Only print results and errors"
    )(command)
    command = click.option(
        "--json", "as_json", is_flag=True, help="Machine-readable JSON output"
    )(command)
    return command


def channel_options(command: Callable) -> Callable:
    command = click.option(
        "--N", "env_photons", type=float, help="Thermal channel: environment photons"
    )(command)
    command = click.option(
        "--eta", type=float, help="Thermal channel: beam-splitter transmissivity"
    )(command)
    command = click.option(
        "--n", "noise", type=float, help="Classical channel: added noise photons"
    )(command)
    command = click.option(
        "--channel",
        type=click.Choice(["classical", "thermal"]),
        default="classical",
        help="Noise channel",
    )(command)
    return command


def report_options(command: Callable) -> Callable:
    command = click.option(
        "--format",
        "-f",
        "report_format",
        type=click.Choice(["markdown", "pdf", "both"]),
        default="both",
        help="Report format (markdown, pdf, or both)",
    )(command)
    command = click.option(
        "--report-dir", "-o", help="Write Markdown/PDF reports to this directory"
    )(command)
    return command


def handle_errors(command: Callable) -> Callable:
    """Map library errors to the documented exit codes"""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except ConjectureViolationError as e:
            click.echo(f"🚩 {e}", err=True)
            sys.exit(EXIT_VIOLATION)
        except (ConvergenceError, IdentityViolationError) as e:
            click.echo(f"❌ Check failed: {e}", err=True)
            sys.exit(EXIT_CONVERGENCE)
        except (InvalidParameterError, TruncationError, ValidationError) as e:
            click.echo(f"❌ Invalid input: {e}", err=True)
            sys.exit(EXIT_VALIDATION)

    return wrapper


class Console:
    """Emoji progress lines, silenced by --quiet/--json"""

    def __init__(self, quiet: bool, verbose: bool, as_json: bool):
        self.silent = quiet or as_json
        configure_logging("ERROR" if quiet else "DEBUG" if verbose else None)

    def echo(self, message: str = "") -> None:
        if not self.silent:
            click.echo(message)


def _build_channel(
    channel: str,
    noise: Optional[float],
    eta: Optional[float],
    env_photons: Optional[float],
) -> ChannelSpec:
    if channel == "classical":
        if noise is None:
            raise click.UsageError("--n is required for the classical channel")
        return ClassicalNoiseSpec(n=noise)
    if eta is None or env_photons is None:
        raise click.UsageError("--eta and --N are required for the thermal channel")
    return ThermalNoiseSpec(eta=eta, N=env_photons)


def _channel_text(spec: ChannelSpec) -> str:
    if isinstance(spec, ClassicalNoiseSpec):
        return f"classical noise n={spec.n:g}"
    return f"thermal noise eta={spec.eta:g} N={spec.N:g}"


def _dump(payload: Dict[str, Any], output: Optional[str] = None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if output:
        with open(output, "w", encoding="utf-8", newline="") as f:
            f.write(text + "\n")
    else:
        click.echo(text)


def _get_timestamp() -> str:
    """Get current timestamp for file naming"""
    return datetime.now().strftime("%Y%m%d_%H%M%S")


def _write_reports(
    console: Console,
    report_dir: str,
    stem: str,
    report_format: str,
    markdown: Callable[[str], Any],
    pdf: Callable[[str], Any],
) -> List[str]:
    os.makedirs(report_dir, exist_ok=True)
    timestamp = _get_timestamp()
    paths = []
    if report_format in ["markdown", "both"]:
        path = os.path.join(report_dir, f"{stem}_{timestamp}.md")
        console.echo(f"📝 Generating Markdown report: {path}")
        markdown(path)
        paths.append(path)
    if report_format in ["pdf", "both"]:
        path = os.path.join(report_dir, f"{stem}_{timestamp}.pdf")
        console.echo(f"📄 Generating PDF report: {path}")
        pdf(path)
        paths.append(path)
    return paths


@click.group()
def main() -> None:
    """Bosonic Minimum Output Entropy Toolkit

    Simulate classical-noise and thermal-noise channels in a truncated Fock
    space, evaluate output entropies, tabulate the minimum-entropy bounds and
    search numerically for inputs beating coherent states.
    """


# --- entropy -----------------------------------------------------------------


def _load_amplitudes(path: str) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    try:
        return np.array([complex(re, im) for re, im in data])
    except (TypeError, ValueError):
        raise InvalidParameterError(
            f"{path} must hold a JSON list of [re, im] amplitude pairs"
        )


def _build_input(
    kind: str,
    alpha: float,
    phase: float,
    level: int,
    nbar: float,
    amplitudes: Optional[str],
) -> DensityOperator:
    if kind == "vacuum":
        return density_from_pure(fock_state(0, 1))
    if kind == "coherent":
        mu = alpha * np.exp(1j * phase)
        return density_from_pure(coherent_state(mu, coherent_cutoff(mu)))
    if kind == "fock":
        return density_from_pure(fock_state(level, level + 1))
    if kind == "thermal":
        return thermal_state(nbar, thermal_cutoff(nbar))
    if not amplitudes:
        raise click.UsageError("--amplitudes is required with --input file")
    return density_from_pure(pure_state(_load_amplitudes(amplitudes)))


def _channel_output(
    rho: DensityOperator, spec: ChannelSpec, check: bool
) -> DensityOperator:
    if check and isinstance(spec, ClassicalNoiseSpec) and spec.n > 0:
        dim = max(rho.dim, output_cutoff(support_dim(rho), spec.n))
        return apply_classical_noise(embed(rho, dim), spec, check_convergence=True)
    return apply_channel(rho, spec)


@main.command()
@channel_options
@click.option(
    "--input",
    "input_kind",
    type=click.Choice(["vacuum", "coherent", "fock", "thermal", "file"]),
    default="vacuum",
    help="Input state",
)
@click.option("--alpha", type=float, default=0.0, help="Coherent amplitude |alpha|")
@click.option("--phase", type=float, default=0.0, help="Coherent phase arg(alpha)")
@click.option("--m", "level", type=click.IntRange(min=0), default=0, help="Fock level")
@click.option("--nbar", type=float, default=0.0, help="Thermal input photons")
@click.option(
    "--amplitudes", type=click.Path(exists=True), help="JSON list of [re, im] pairs"
)
@click.option("--z", "orders", type=float, multiple=True, help="Renyi order(s)")
@click.option("--check", is_flag=True, help="Verify quadrature and grid convergence")
@output_options
@handle_errors
def entropy(
    channel: str,
    noise: Optional[float],
    eta: Optional[float],
    env_photons: Optional[float],
    input_kind: str,
    alpha: float,
    phase: float,
    level: int,
    nbar: float,
    amplitudes: Optional[str],
    orders: Tuple[float, ...],
    check: bool,
    as_json: bool,
    quiet: bool,
    verbose: bool,
) -> None:
    """Output entropies of a single input state

    Examples:

    \b
    # Vacuum through the classical-noise channel
    python main.py entropy --n 1 --input vacuum --z 2

    \b
    # Thermal-noise channel
    python main.py entropy --channel thermal --eta 0.5 --N 2 --z 2
    """
    console = Console(quiet, verbose, as_json)
    spec = _build_channel(channel, noise, eta, env_photons)
    orders = orders or (2.0,)
    rho = _build_input(input_kind, alpha, phase, level, nbar, amplitudes)

    console.echo(f"🔍 Applying {_channel_text(spec)} to the {input_kind} input...")
    out = _channel_output(rho, spec, check)

    renyi = {f"{z:g}": renyi_entropy(out, z) for z in orders}
    if check:
        wehrl_value, _ = wehrl_converged(out)
        renyi_w = {
            f"{z:g}": renyi_wehrl_converged(out, z)[0] for z in orders if z >= 1
        }
    else:
        field = husimi(out)
        wehrl_value = wehrl(field)
        renyi_w = {f"{z:g}": renyi_wehrl(field, z) for z in orders if z >= 1}

    if as_json:
        _dump(
            {
                "config": {
                    "command": "entropy",
                    "input": input_kind,
                    "channel": spec.model_dump(),
                    "z": list(orders),
                    "check": check,
                },
                "output_dim": out.dim,
                "tail_mass": out.tail_mass,
                "renyi": renyi,
                "von_neumann": von_neumann(out),
                "wehrl": wehrl_value,
                "renyi_wehrl": renyi_w,
            }
        )
        return

    console.echo(f"✅ Output state on {out.dim} levels (tail {out.tail_mass:.1e})")
    for z, value in renyi.items():
        click.echo(f"S_{z} = {value:.6f}")
    click.echo(f"S_vN = {von_neumann(out):.6f}")
    click.echo(f"W = {wehrl_value:.6f}")
    for z, value in renyi_w.items():
        click.echo(f"W_{z} = {value:.6f}")


# --- bounds ------------------------------------------------------------------


@main.command()
@click.option("--n", "noise", type=float, required=True, help="Classical noise n")
@click.option("--z-min", type=float, default=0.2, show_default=True)
@click.option("--z-max", type=float, default=12.0, show_default=True)
@click.option("--points", type=click.IntRange(min=2), default=200, show_default=True)
@click.option("--z", "orders", type=float, multiple=True, help="Explicit order(s)")
@click.option("--vn-bound", type=float, help="Known lower bound on the vN minimum")
@click.option("--k-max", type=click.IntRange(min=2), default=12, show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), help="CSV output path")
@output_options
@handle_errors
def bounds(
    noise: float,
    z_min: float,
    z_max: float,
    points: int,
    orders: Tuple[float, ...],
    vn_bound: Optional[float],
    k_max: int,
    output: Optional[str],
    as_json: bool,
    quiet: bool,
    verbose: bool,
) -> None:
    """Upper bound and lower bounds 1-4 on the minimum Renyi entropy, as CSV"""
    console = Console(quiet, verbose, as_json or output is None)
    if orders:
        grid = np.array(sorted(orders))
    elif 0 < z_min < z_max:
        grid = np.linspace(z_min, z_max, points)
    else:
        raise InvalidParameterError("need 0 < --z-min < --z-max")

    console.echo(f"📈 Tabulating bounds for n={noise:g} on {grid.size} orders...")
    curve = figure_data(noise, grid, vn_bound, k_max)

    if as_json:
        _dump(json.loads(curve.model_dump_json()), output)
        return

    content = ReportGenerator().write_bounds_csv(curve, output)
    if output is None:
        click.echo(content, nl=False)
    else:
        console.echo(f"✅ Wrote {grid.size} rows to {output}")


# --- theta-verify ------------------------------------------------------------


@main.command("theta-verify")
@click.option("--k", type=click.IntRange(min=2), required=True, help="Number of modes")
@click.option("--n", "noise", type=float, required=True, help="Classical noise n")
@report_options
@output_options
@handle_errors
def theta_verify(
    k: int,
    noise: float,
    report_dir: Optional[str],
    report_format: str,
    as_json: bool,
    quiet: bool,
    verbose: bool,
) -> None:
    """Check the circulant eigen-data, factors and determinant identity"""
    console = Console(quiet, verbose, as_json)
    console.echo(f"🧮 Verifying circulant factors for k={k}, n={noise:g}...")
    report = verify_theta(k, noise)

    if report_dir:
        generator = ReportGenerator()
        _write_reports(
            console,
            report_dir,
            f"theta_k{k}",
            report_format,
            lambda path: generator.generate_theta_markdown(report, path),
            lambda path: generator.generate_theta_pdf(report, path),
        )

    if as_json:
        _dump(json.loads(report.model_dump_json()))
    else:
        for factor in report.factors:
            tag = " (identity)" if factor.is_identity else ""
            click.echo(
                f"Theta_{factor.index}: prefactor {factor.prefactor:.12g}, "
                f"ratio {factor.ratio:.12g}{tag}"
            )
        click.echo(f"determinant residual = {report.det_residual:.3e}")
        click.echo(f"characteristic deviation = {report.char_max_deviation:.3e}")

    if not report.passed:
        raise IdentityViolationError(
            f"residuals above tolerance for k={k}, n={noise:g}"
        )
    console.echo("✨ All identities hold")


# --- conjecture --------------------------------------------------------------


@main.command()
@channel_options
@click.option(
    "--objective",
    type=click.Choice(["renyi", "wehrl"]),
    default="renyi",
    help="Output entropy to minimize",
)
@click.option("--z", type=float, default=2.0, show_default=True, help="Renyi order")
@click.option(
    "--support-dim", type=click.IntRange(1, 8), default=4, show_default=True
)
@click.option("--starts", type=click.IntRange(min=1), default=20, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--inject-coherent", is_flag=True, help="Use the vacuum as start 0")
@click.option("--output", type=click.Path(dir_okay=False), help="JSON output path")
@report_options
@output_options
@handle_errors
def conjecture(
    channel: str,
    noise: Optional[float],
    eta: Optional[float],
    env_photons: Optional[float],
    objective: str,
    z: float,
    support_dim: int,
    starts: int,
    seed: int,
    inject_coherent: bool,
    output: Optional[str],
    report_dir: Optional[str],
    report_format: str,
    as_json: bool,
    quiet: bool,
    verbose: bool,
) -> None:
    """Search truncated pure inputs for output entropy below coherent states"""
    console = Console(quiet, verbose, as_json or output is None)
    spec = _build_channel(channel, noise, eta, env_photons)

    console.echo(
        f"🔍 Running {starts} {objective} searches on {_channel_text(spec)}..."
    )
    if objective == "renyi":
        report = minimize_output_renyi(
            spec, z, support_dim, starts, seed, inject_coherent
        )
        gaussian = minimize_gaussian(spec, z)
        console.echo(
            f"📐 Gaussian minimum {gaussian.value:.10f} at s={gaussian.squeeze:g}"
        )
    else:
        report = minimize_output_wehrl(spec, support_dim, starts, seed, inject_coherent)

    config = dict(report.config)
    config.update(
        {
            "command": "conjecture",
            "channel": spec.model_dump(),
            "objective": objective,
            "z": z if objective == "renyi" else None,
            "starts": starts,
            "seed": seed,
        }
    )
    report = report.model_copy(update={"config": config})

    payload = json.loads(report.model_dump_json())
    _dump(payload, output)

    if report_dir:
        generator = ReportGenerator()
        _write_reports(
            console,
            report_dir,
            f"search_{objective}",
            report_format,
            lambda path: generator.generate_search_markdown(report, path),
            lambda path: generator.generate_search_pdf(report, path),
        )

    console.echo(
        f"🎯 Best {report.best_value:.10f}, coherent {report.coherent_value:.10f}"
    )
    if report.violation:
        raise ConjectureViolationError(
            report.gap,
            f"gap {report.gap:.3e} exceeds the truncation error "
            f"{report.truncation_error:.3e}"
        )
    console.echo("✨ No violation found")


if __name__ == "__main__":
    main()
