"""Command-line driver: run configuration, command dispatch, results and manifest output."""

import argparse
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple
from colorama import Fore, init
from dotenv import dotenv_values

from app import __version__
from app.equilibrium import DEFAULT_WEIGHT_FLOOR, solve_equilibrium
from app.exceptions import (
    ChargedDropError,
    ConfigurationError,
    ContractError,
    ConvergenceError,
    ValidationError,
)
from app.experiments import (
    circle_density_profile,
    corner_blowup_study,
    default_shape_suite,
    empirical_threshold,
    fuglede_sweep,
    density_bound_sweep,
    log_divergence_and_scaling,
    mainstab_sweep,
    nonexistence_sweep,
    reservoir_splitting_construction,
    splitting_construction,
    stability_sweep,
)
from app.functional import ball_energy, evaluate_F, evaluate_G, functional_nodes
from app.geometry import Ball, Shape, load_shape
from app.input_validators import InputValidator
from app.kernel import KernelSpec
from app.lattice import unit_ball_volume
from app.logger import Logger
from app.runner import ExperimentRunner
from app.sweep_record import SweepRecord
from app.toolkit_config import ToolkitConfig

init(autoreset=True)

COMMANDS = ('capacity', 'equilibrium', 'functional', 'nonexistence', 'splitting', 'reservoir',
            'stability', 'mainstab', 'density', 'corner', 'logchecks')

EXIT_OK = 0
EXIT_OTHER = 1
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_CONTRACT = 4

MANIFEST_FILE = "manifest.json"
EQUILIBRIUM_FILE = "equilibrium.csv"


def _nonnegative(value: str) -> float:
    number = InputValidator.validate_number(value)
    if number < 0:
        raise ValidationError(f"Expected a nonnegative number, got '{value}'")
    return number


def _optional_text(value: str) -> Optional[str]:
    text = str(value).strip()
    return text or None


PARAMETERS: Dict[str, Tuple[Callable[[str], Any], Any]] = {
    'alpha': (InputValidator.validate_positive, 1.0),
    'dim': (lambda v: InputValidator.validate_int(v, 2), 3),
    'kernel': (InputValidator.validate_kernel_family, 'riesz'),
    'charge': (_nonnegative, 1.0),
    'charges': (InputValidator.validate_number_list, [0.0, 0.1, 0.5, 1.0, 2.0]),
    'delta': (InputValidator.validate_positive, 0.5),
    'nodes': (lambda v: InputValidator.validate_int(v, 12), 2000),
    'beta': (InputValidator.validate_positive, 0.75),
    'n_list': (lambda v: InputValidator.validate_int_list(v, 1), [16, 64, 256, 1024, 4096]),
    'modes': (InputValidator.validate_modes, [(2, 0), (3, 0), (4, 0)]),
    'amplitudes': (InputValidator.validate_number_list, [0.01, 0.02, 0.05]),
    'mass': (InputValidator.validate_positive, None),
    'radius': (InputValidator.validate_positive, 1.0),
    'side': (InputValidator.validate_positive, 2.0),
    'shape': (_optional_text, None),
    'radii': (InputValidator.validate_number_list, [0.5, 1.0, 2.0]),
    'separations': (InputValidator.validate_number_list, [8.0, 16.0, 32.0, 64.0]),
    'lambdas': (InputValidator.validate_number_list, [0.5, 2.0, 3.7]),
}

RUN_KEYS = ('command', 'out', 'seed', 'threads', 'tol', 'max_iter', 'weight_floor')


def _normalize_key(key: str) -> str:
    return key.strip().lower().replace('-', '_')


@dataclass
class RunConfig:
    """Fully resolved run: command, parameters, output directory and solver settings."""

    command: str
    parameters: Dict[str, Any] = field(default_factory=dict)
    output_path: str = 'results'
    seed: int = 0
    threads: int = 1
    tolerance: float = 1e-6
    max_iter: int = 50_000
    weight_floor: float = DEFAULT_WEIGHT_FLOOR

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValidationError(f"Unknown command: '{self.command}' (expected one of {', '.join(COMMANDS)})")
        if self.tolerance <= 0:
            raise ValidationError(f"Tolerance must be positive, got {self.tolerance}")
        if self.threads < 1 or self.max_iter < 1:
            raise ValidationError("threads and max_iter must be at least 1")
        if not 0.0 <= self.weight_floor < 1.0:
            raise ValidationError(f"weight_floor must lie in [0, 1), got {self.weight_floor}")
        resolved = {name: default for name, (_, default) in PARAMETERS.items()}
        resolved.update(self.parameters)
        self.parameters = resolved

    @classmethod
    def from_sources(cls, cli_values: Dict[str, Any], file_values: Optional[Dict[str, Any]] = None,
                     toolkit: Optional[ToolkitConfig] = None) -> 'RunConfig':
        """
        Merge sources with precedence CLI flag > file > default.

        Raises:
            ValidationError: On unknown keys (the key is named) or malformed values
        """
        merged: Dict[str, Any] = {}
        for source in (file_values or {}, cli_values):
            for key, value in source.items():
                if value is None:
                    continue
                name = _normalize_key(key)
                if name not in PARAMETERS and name not in RUN_KEYS:
                    raise ValidationError(f"Unknown configuration key: '{key}'")
                merged[name] = value

        parameters = {}
        for name, (parser, _) in PARAMETERS.items():
            if name in merged:
                value = merged[name]
                parameters[name] = parser(value) if isinstance(value, str) else value

        if 'command' not in merged:
            raise ValidationError("No command given (use --command or a 'command' key)")
        defaults_threads = toolkit.threads if toolkit else 1
        return cls(
            command=str(merged['command']).strip().lower(),
            parameters=parameters,
            output_path=str(merged.get('out', toolkit.results_dir if toolkit else 'results')),
            seed=InputValidator.validate_int(merged.get('seed', 0)),
            threads=InputValidator.validate_int(merged.get('threads', defaults_threads), 1),
            tolerance=InputValidator.validate_positive(merged.get('tol', toolkit.tolerance if toolkit else 1e-6)),
            max_iter=InputValidator.validate_int(merged.get('max_iter', toolkit.max_iter if toolkit else 50_000), 1),
            weight_floor=InputValidator.validate_number(
                merged.get('weight_floor', toolkit.weight_floor if toolkit else DEFAULT_WEIGHT_FLOOR)),
        )

    def to_dict(self) -> dict:
        """Resolved configuration as plain JSON values."""
        parameters = {}
        for name, value in self.parameters.items():
            if name == 'modes':
                value = [f"{l}:{m}" for l, m in value]
            parameters[name] = list(value) if isinstance(value, tuple) else value
        return {
            'command': self.command,
            'parameters': parameters,
            'output_path': self.output_path,
            'seed': self.seed,
            'threads': self.threads,
            'tolerance': self.tolerance,
            'max_iter': self.max_iter,
            'weight_floor': self.weight_floor,
        }


def load_run_file(filepath: str) -> Dict[str, str]:
    """
    Read a key=value run configuration.

    Raises:
        ConfigurationError: If the file does not exist
    """
    if not Path(filepath).exists():
        raise ConfigurationError(f"Config file not found: {filepath}")
    return {key: value for key, value in dotenv_values(filepath).items() if value is not None}


# --- command implementations -------------------------------------------------

def _kernel(params: Dict[str, Any]) -> KernelSpec:
    if params['kernel'] == 'logarithmic':
        return KernelSpec.logarithmic(params['dim'])
    return KernelSpec.riesz(params['dim'], params['alpha'])


def _shape(params: Dict[str, Any]) -> Shape:
    if params['shape']:
        return load_shape(params['shape'])
    return Ball((0.0,) * params['dim'], params['radius'])


def _solve_on_shape(config: RunConfig, seed: Optional[int] = None):
    params = config.parameters
    spec = _kernel(params)
    shape = _shape(params)
    nodes = functional_nodes(shape, spec, params['nodes'])
    sol = solve_equilibrium(spec, nodes, tol=config.tolerance, max_iter=config.max_iter,
                            weight_floor=config.weight_floor, threads=config.threads, seed=seed)
    return spec, shape, sol


def _kernel_parameters(params: Dict[str, Any]) -> Dict[str, Any]:
    """Kernel columns of a record; the logarithmic kernel has no alpha."""
    columns = {'kernel': params['kernel'], 'dim': params['dim']}
    if params['kernel'] == 'riesz':
        columns['alpha'] = params['alpha']
    return columns


def _capacity_record(config: RunConfig, spec: KernelSpec, shape: Shape, sol) -> SweepRecord:
    params = config.parameters
    energies = {'energy': sol.energy, 'capacity': sol.capacity, 'el_spread': sol.el_spread,
                'el_violation': sol.el_violation, 'residual': sol.residual, 'iterations': sol.iterations}
    verdicts = {'converged': sol.converged}
    if isinstance(shape, Ball) and not params['shape']:
        expected = ball_energy(spec, shape.radius)
        energies['expected_energy'] = expected
        verdicts['matches_closed_form'] = abs(sol.energy - expected) <= 0.01 * max(abs(expected), 1.0)
    return SweepRecord(
        config.command,
        {**_kernel_parameters(params),
         'nodes': params['nodes'], 'radius': params['radius'], 'shape': params['shape'] or ''},
        energies,
        verdicts,
    )


def _run_capacity(config: RunConfig, runner: ExperimentRunner, manifest: dict):
    spec, shape, sol = _solve_on_shape(config)
    runner.record(_capacity_record(config, spec, shape, sol))
    manifest['diagnostics'].update(sol.summary())


def _run_equilibrium(config: RunConfig, runner: ExperimentRunner, manifest: dict):
    spec, shape, sol = _solve_on_shape(config, seed=config.seed)
    runner.record(_capacity_record(config, spec, shape, sol))
    sol.save(str(Path(config.output_path) / EQUILIBRIUM_FILE), runner.config.float_format, runner.provenance)
    manifest['diagnostics'].update(sol.summary())


def _run_functional(config: RunConfig, runner: ExperimentRunner, manifest: dict):
    params = config.parameters
    spec = _kernel(params)
    shape = _shape(params)
    options = {'tol': config.tolerance, 'max_iter': config.max_iter, 'threads': config.threads,
               'weight_floor': config.weight_floor}
    report_f = evaluate_F(shape, spec, params['charge'], params['nodes'], **options)
    energies = {f"F_{k}": v for k, v in report_f.to_dict().items()}
    verdicts = {'F_identity': math.isclose(
        report_f.total, report_f.perimeter + report_f.charge ** 2 * report_f.riesz_energy, rel_tol=1e-12)}
    if not spec.is_riesz or spec.alpha < spec.dimension - 1:
        report_g = evaluate_G(shape, spec, params['charge'], params['nodes'], **options)
        energies.update({f"G_{k}": v for k, v in report_g.to_dict().items()})
        slack = config.tolerance * max(abs(report_f.total), 1.0)
        verdicts['G_at_least_F'] = report_g.total >= report_f.total - slack
    runner.record(SweepRecord(
        'functional',
        {**_kernel_parameters(params),
         'charge': params['charge'], 'nodes': params['nodes'], 'radius': params['radius'],
         'shape': params['shape'] or ''},
        energies,
        verdicts,
    ))


def _run_nonexistence(config: RunConfig, runner: ExperimentRunner, manifest: dict):
    params = config.parameters
    mass = params['mass'] or unit_ball_volume(params['dim'])
    runner.run(nonexistence_sweep, params['dim'], params['alpha'], mass, params['charge'],
               params['beta'], params['n_list'])


def _run_splitting(config: RunConfig, runner: ExperimentRunner, manifest: dict):
    params = config.parameters
    runner.run(splitting_construction, params['dim'], params['alpha'], params['delta'], params['charge'])


def _run_reservoir(config: RunConfig, runner: ExperimentRunner, manifest: dict):
    params = config.parameters
    runner.run(reservoir_splitting_construction, params['dim'], params['alpha'], params['delta'],
               params['charge'], params['beta'])


def _run_stability(config: RunConfig, runner: ExperimentRunner, manifest: dict):
    params = config.parameters
    records = runner.run(stability_sweep, params['delta'], params['charges'], params['modes'],
                         params['amplitudes'], params['nodes'], config.tolerance, config.max_iter,
                         config.threads, config.weight_floor)
    manifest['fitted_constants']['empirical_threshold'] = empirical_threshold(records)
    fuglede_records, c0, mean_fit = fuglede_sweep(default_shape_suite(seed=config.seed))
    for record in fuglede_records:
        runner.record(record)
    manifest['fitted_constants']['fuglede_c0'] = c0.constant
    manifest['fitted_constants']['fuglede_mean_C'] = mean_fit.constant


def _run_mainstab(config: RunConfig, runner: ExperimentRunner, manifest: dict):
    params = config.parameters
    shapes = default_shape_suite(seed=config.seed)
    records, fit = mainstab_sweep(shapes, params['nodes'], config.tolerance, config.max_iter,
                                  config.threads, config.weight_floor)
    for record in records:
        runner.record(record)
    manifest['fitted_constants']['mainstab_C'] = fit.constant


def _run_density(config: RunConfig, runner: ExperimentRunner, manifest: dict):
    params = config.parameters
    shapes = default_shape_suite(seed=config.seed)
    records = runner.run(density_bound_sweep, shapes, params['delta'], params['nodes'], config.tolerance,
                         config.max_iter, config.weight_floor)
    manifest['diagnostics']['density_bound_holds'] = all(r.verdicts['holds'] for r in records)


def _run_corner(config: RunConfig, runner: ExperimentRunner, manifest: dict):
    params = config.parameters
    runner.run(corner_blowup_study, params['side'], params['nodes'], config.tolerance, config.max_iter,
               config.weight_floor)


def _run_logchecks(config: RunConfig, runner: ExperimentRunner, manifest: dict):
    params = config.parameters
    for radius in params['radii']:
        runner.run(circle_density_profile, radius, params['nodes'], config.tolerance, config.max_iter,
                   config.weight_floor)
    runner.run(log_divergence_and_scaling, params['radius'], params['separations'], params['lambdas'],
               params['nodes'], config.tolerance, config.max_iter, config.weight_floor)


HANDLERS = {
    'capacity': _run_capacity,
    'equilibrium': _run_equilibrium,
    'functional': _run_functional,
    'nonexistence': _run_nonexistence,
    'splitting': _run_splitting,
    'reservoir': _run_reservoir,
    'stability': _run_stability,
    'mainstab': _run_mainstab,
    'density': _run_density,
    'corner': _run_corner,
    'logchecks': _run_logchecks,
}


def exit_code_for(error: BaseException) -> int:
    """Map an error category to the process exit status."""
    if isinstance(error, (ValidationError, ConfigurationError)):
        return EXIT_CONFIG
    if isinstance(error, ConvergenceError):
        return EXIT_CONVERGENCE
    if isinstance(error, ContractError):
        return EXIT_CONTRACT
    return EXIT_OTHER


def run(config: RunConfig, toolkit: Optional[ToolkitConfig] = None) -> int:
    """
    Execute one command and write results.csv and manifest.json to the output directory.

    Returns:
        Exit status: 0 success, 2 configuration, 3 convergence, 4 contract, 1 other
    """
    toolkit = toolkit or ToolkitConfig()
    logger = Logger.get_logger(log_dir=toolkit.log_dir)
    out = Path(config.output_path)
    provenance = {'version': __version__, 'tolerance': config.tolerance, 'max_iter': config.max_iter,
                  'weight_floor': config.weight_floor}
    runner = ExperimentRunner(toolkit, results_dir=str(out), provenance=provenance)
    manifest: Dict[str, Any] = {
        'version': __version__,
        'config': config.to_dict(),
        'tolerances': toolkit.to_dict() | {'tolerance': config.tolerance, 'max_iter': config.max_iter,
                                          'weight_floor': config.weight_floor},
        'seed': config.seed,
        'fitted_constants': {},
        'diagnostics': {},
    }

    status = EXIT_OK
    try:
        HANDLERS[config.command](config, runner, manifest)
    except ChargedDropError as e:
        status = exit_code_for(e)
        manifest['diagnostics']['error'] = f"{type(e).__name__}: {e}"
        if isinstance(e, ConvergenceError):
            manifest['diagnostics']['residual'] = e.residual
        logger.error(f"{config.command} failed: {e}")

    manifest['status'] = status
    manifest['diagnostics']['records'] = len(runner.store)
    if len(runner.store):
        runner.save_results()
    runner.store.write_manifest(str(out / MANIFEST_FILE), manifest)
    return status


class ToolkitCLI:
    """Argument parsing and coloured reporting around run()."""

    def __init__(self, toolkit: Optional[ToolkitConfig] = None):
        self.toolkit = toolkit

    @staticmethod
    def build_parser() -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(
            prog='charged-drop',
            description='Equilibrium measures, capacities and stability experiments for charged drops.',
        )
        parser.add_argument('--command', choices=COMMANDS)
        parser.add_argument('--config', help='key=value run configuration file')
        parser.add_argument('--out', help='output directory')
        parser.add_argument('--seed')
        parser.add_argument('--threads')
        parser.add_argument('--tol')
        parser.add_argument('--max-iter')
        parser.add_argument('--weight-floor')
        for name in PARAMETERS:
            parser.add_argument(f"--{name.replace('_', '-')}", dest=name)
        return parser

    def parse(self, argv: Optional[Sequence[str]] = None) -> RunConfig:
        """
        Resolve a RunConfig from flags and the optional config file.

        Raises:
            ValidationError, ConfigurationError: On bad input
        """
        args = vars(self.build_parser().parse_args(argv))
        config_file = args.pop('config')
        file_values = load_run_file(config_file) if config_file else {}
        return RunConfig.from_sources(args, file_values, self.toolkit)

    def display_summary(self, config: RunConfig, status: int):
        out = Path(config.output_path)
        color = Fore.GREEN if status == EXIT_OK else Fore.RED
        print(f"{Fore.CYAN}{'=' * 60}")
        print(f"{Fore.CYAN}{config.command:^60}")
        print(f"{Fore.CYAN}{'=' * 60}")
        print(f"{color}Status: {status}")
        print(f"{Fore.WHITE}Results:  {out / ExperimentRunner.RESULTS_FILE}")
        print(f"{Fore.WHITE}Manifest: {out / MANIFEST_FILE}")

    def main(self, argv: Optional[Sequence[str]] = None) -> int:
        try:
            self.toolkit = self.toolkit or ToolkitConfig()
            config = self.parse(argv)
        except SystemExit as e:
            return EXIT_CONFIG if e.code else EXIT_OK
        except ChargedDropError as e:
            print(f"{Fore.RED}Configuration Error: {str(e)}")
            return exit_code_for(e)
        status = run(config, self.toolkit)
        self.display_summary(config, status)
        return status


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    return ToolkitCLI().main(argv)
