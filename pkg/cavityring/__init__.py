import json
import logging
import pathlib
import sys

import click
from pydantic import ValidationError

from cavityring.dynamics import integrate_moments
from cavityring.exceptions import CavityRingError, ExitStatus, UnexplainedMismatchError
from cavityring.hilbert import enumerate_basis
from cavityring.output import render_json, render_series, render_spectrum, write_atomic
from cavityring.reports import build_comparison
from cavityring.run_config import RunConfig, load_run_config
from cavityring.spectra import tabulate_spectrum
from cavityring.sweep import run_sweep
from cavityring.symmetry import GroupKind, SymmetryGroup, orbits
from cavityring.system_params import SystemParams

FORMATS = click.Choice(["csv", "json"])
GROUPS = click.Choice([kind.value for kind in GroupKind])


class CavityRingGroup(click.Group):
    """Maps every failure onto the documented exit statuses."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            code = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.ClickException as exc:
            exc.show()
            code = ExitStatus.INVALID_INPUT
        except click.Abort:
            click.echo("Aborted!", err=True)
            code = ExitStatus.INVALID_INPUT
        except ValidationError as exc:
            click.echo(f"Error: invalid configuration\n{exc}", err=True)
            code = ExitStatus.INVALID_INPUT
        except CavityRingError as exc:
            click.echo(f"Error: {exc}", err=True)
            code = exc.exit_code
        else:
            code = code if isinstance(code, int) else ExitStatus.SUCCESS
        if standalone_mode:
            sys.exit(int(code))
        return int(code)


def _emit(text: str, out: pathlib.Path | None) -> None:
    """Data goes to --out when given, otherwise to stdout."""
    if out is None:
        click.echo(text, nl=False)
        return
    write_atomic(out, text)
    click.echo(f"Wrote {out}", err=True)


def _run_config(overrides: dict) -> RunConfig:
    return load_run_config(click.get_current_context().obj["config_file"], overrides)


# Default arguments for all commands.
@click.group(cls=CavityRingGroup)
@click.version_option(package_name="cavityring", prog_name="cavityring")
@click.option(
    "--config",
    "-c",
    "config_file",
    envvar="CAVITYRING_CONFIG",
    type=click.Path(
        exists=True,
        file_okay=True,
        dir_okay=False,
        readable=True,
        resolve_path=True,
        path_type=pathlib.Path,
    ),
    default=None,
    help="Path to a YAML or JSON run profile. Flags override profile values.",
)
@click.option("--verbose", "-v", is_flag=True, default=False, help="Log debug details to stderr.")
@click.pass_context
def cli(ctx, config_file: pathlib.Path | None, verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    ctx.ensure_object(dict)
    ctx.obj["config_file"] = config_file


@cli.command(help="Print the number of collective states of a ring.")
@click.option("--cavities", "-n", type=click.IntRange(min=2), default=2, show_default=True)
@click.option("--excitations", "-m", type=click.IntRange(min=0), default=1, show_default=True)
@click.option("--group", type=GROUPS, default=GroupKind.DIHEDRAL.value, show_default=True)
@click.option("--fock-cutoff", type=click.IntRange(min=0), default=None, help="Default: the excitation number.")
@click.option("--verbose", "show_orbits", is_flag=True, default=False, help="Also list each orbit.")
def count(cavities: int, excitations: int, group: str, fock_cutoff: int | None, show_orbits: bool) -> None:
    params = SystemParams(n_cavities=cavities, fock_cutoff=fock_cutoff)
    found = orbits(enumerate_basis(params, excitations), SymmetryGroup.build(group, cavities))
    click.echo(len(found))
    if show_orbits:
        for orbit in found:
            click.echo(f"{orbit.representative}\t{orbit.size}")


def system_options(command):
    for option in reversed(
        [
            click.option("--cavities", "-n", "n_cavities", type=int, default=None, help="Number of cavities."),
            click.option("--excitations", "-m", "n_ex", type=int, default=None, help="Excitation manifold."),
            click.option("--fock-cutoff", type=int, default=None, help="Photons per cavity."),
            click.option("--g", "g", type=float, default=None, help="Atom-field coupling."),
            click.option("--chi", "chi", type=float, default=None, help="Photon hopping."),
            click.option("--omega", "omega", type=float, default=None, help="Bare resonance."),
            click.option("--gamma", "gamma", type=float, default=None, help="Collective decay rate."),
            click.option("--phi", "phi", type=str, default=None, help="Phase: 0 or pi."),
        ]
    ):
        command = option(command)
    return command


def output_options(command):
    command = click.option("--format", "fmt", type=FORMATS, default=None, help="csv (default) or json.")(command)
    command = click.option(
        "--out", "-o", type=click.Path(dir_okay=False, path_type=pathlib.Path), default=None, help="Output file."
    )(command)
    return command


@cli.command(help="Tabulate dressed levels: closed form, numerical oracle and deviation.")
@system_options
@click.option("--group", type=GROUPS, default=None)
@click.option("--topology", type=click.Choice(["ring", "all-pairs"]), default=None)
@click.option("--basis", type=click.Choice(["collective", "product"]), default=None)
@output_options
def spectrum(out, fmt, basis, topology, group, **system) -> None:
    system.update(group=group, topology=topology, basis=basis)
    run = _run_config({"system": system, "output": {"path": out, "format": fmt}})
    settings = run.system
    rows = tabulate_spectrum(
        settings.params(),
        settings.n_ex,
        settings.group,
        settings.ring(),
        collective=settings.basis == "collective",
    )
    _emit(render_spectrum(rows, run.output.format), run.output.path)


@cli.command(help="Integrate the two-cavity moment system and print the time series.")
@click.option("--p", "p", type=float, default=None, help="Ratio c2/c1.")
@click.option("--q", "q", type=float, default=None, help="Coherent rate in units of 1/tau1.")
@click.option("--derive/--no-derive", default=None, help="Take p and q from --g, --chi and --gamma.")
@click.option("--x0", type=float, default=None)
@click.option("--y0", type=float, default=None)
@click.option("--u0", type=float, default=None)
@click.option("--w0", type=float, default=None)
@click.option("--tau-end", "tau_end", type=float, default=None, help="Default: 10.")
@click.option("--dt", type=float, default=None, help="Default: 0.001.")
@system_options
@output_options
def evolve(out, fmt, p, q, derive, x0, y0, u0, w0, tau_end, dt, **system) -> None:
    dynamics = {"p": p, "q": q, "derive": derive, "x0": x0, "y0": y0, "u0": u0, "w0": w0}
    dynamics.update(tau_end=tau_end, dt=dt)
    run = _run_config({"system": system, "dynamics": dynamics, "output": {"path": out, "format": fmt}})
    params = run.dynamics.resolve(run.system.params())
    start = run.dynamics.initial_state()
    series = integrate_moments(start, params.p, params.q, run.dynamics.tau_end, run.dynamics.dt)
    _emit(render_series(series, run.output.format), run.output.path)


@cli.command("sweep", help="Run one evolve or spectrum per grid point of the profile's sweep section.")
@click.option(
    "--out",
    "-o",
    type=click.Path(file_okay=False, path_type=pathlib.Path),
    default=None,
    help="Result directory. Default: output.path of the profile.",
)
@click.option("--jobs", "-j", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--format", "fmt", type=FORMATS, default=None)
@click.pass_context
def sweep_command(ctx, out, jobs, fmt) -> None:
    if ctx.obj["config_file"] is None:
        raise click.UsageError("sweep needs a run profile (--config).")
    run = _run_config({"output": {"format": fmt}})
    target = out or run.output.path
    if target is None:
        raise click.UsageError("No result directory: pass --out or set output.path.")
    entries = run_sweep(run, target, jobs)
    click.echo(f"Wrote {len(entries)} files and manifest to {target}", err=True)


@cli.command(help="Cross-check closed forms against the numerical oracle and write a JSON report.")
@click.option("--out", "-o", type=click.Path(dir_okay=False, path_type=pathlib.Path), default=None)
@click.option(
    "--section",
    "sections",
    type=click.Choice(["counting", "spectra", "dynamics"]),
    multiple=True,
    help="Limit to these sections. Default: all.",
)
@click.option("--tolerance", type=float, default=None)
def compare(out, sections, tolerance) -> None:
    overrides = {"compare": {"tolerance": tolerance}}
    run = _run_config(overrides)
    settings = run.compare
    if sections:
        settings = settings.model_copy(update={"sections": list(sections)})
    document = build_comparison(settings)
    _emit(render_json(document.to_json()), out)
    summary = document.summary()
    click.echo(", ".join(f"{count} {verdict}" for verdict, count in summary.items()), err=True)
    if document.unexplained:
        raise UnexplainedMismatchError(document.unexplained)


@cli.command(help="Print the JSON schema of run profiles.")
def schema() -> None:
    click.echo(json.dumps(RunConfig.model_json_schema(), indent=4))


def main() -> None:
    cli(auto_envvar_prefix="CAVITYRING", prog_name="cavityring")
