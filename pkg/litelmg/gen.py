#!/usr/bin/env python3

#
# This file is part of LiteLMG.
#
# SPDX-License-Identifier: BSD-2-Clause

"""
LiteLMG command-line generator

Every run is described by a YAML configuration file (see configs/ for the shipped ones) that can
be overridden from the command line:
- params:       device parameters -> effective Raman parameters -> LMG parameters, printed as JSON.
- phase-sweep:  semiclassical steady states on a lambda x (Gamma_b or gamma_dep) grid.
- squeeze:      Holstein-Primakoff squeezing dynamics, single curve or the whole rate grid.
- evolve-dicke: exact master-equation dynamics in the symmetric Dicke sector.

Each data file is written atomically together with a <out>.json provenance sidecar. Exit codes:
0 success, 2 configuration error, 3 numerical failure.
"""

import os
import sys
import json
import math
import logging
import argparse
import datetime

import yaml
import numpy as np

import litelmg
from litelmg.common import Settings, ConfigError, NumericalError, atomic_write, csv_content
from litelmg import device as lmg_device
from litelmg import lmgmap
from litelmg import semiclassical
from litelmg import dicke
from litelmg import hpboson
from litelmg import squeezing

logger = logging.getLogger(__name__)

commands = ["params", "phase-sweep", "squeeze", "evolve-dicke"]

# Value parsing ------------------------------------------------------------------------------------

def _number(where, value):
    # PyYAML reads 1e12 (no dot) as a string, so numeric strings are accepted; units are not.
    if isinstance(value, bool):
        raise ConfigError("{}: expected a number, got {!r}".format(where, value))
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            pass
    raise ConfigError("{}: expected a plain number (units are not accepted), got {!r}".format(where, value))


def _optional_number(where, value):
    return None if value is None else _number(where, value)


def _positive(where, value):
    v = _number(where, value)
    if not v > 0:
        raise ConfigError("{}: must be positive, got {!r}".format(where, value))
    return v


def _integer(where, value):
    v = _number(where, value)
    if v != int(v):
        raise ConfigError("{}: expected an integer, got {!r}".format(where, value))
    return int(v)


def _optional_integer(where, value):
    return None if value is None else _integer(where, value)


def _positive_integer(where, value):
    v = _integer(where, value)
    if v < 1:
        raise ConfigError("{}: must be at least 1, got {!r}".format(where, value))
    return v


def _boolean(where, value):
    if not isinstance(value, bool):
        raise ConfigError("{}: expected true or false, got {!r}".format(where, value))
    return value


def _string(where, value):
    if not isinstance(value, str):
        raise ConfigError("{}: expected a string, got {!r}".format(where, value))
    return value


def _optional_string(where, value):
    return None if value is None else _string(where, value)


def _numbers(where, value, count=None):
    if not isinstance(value, (list, tuple)):
        raise ConfigError("{}: expected a list, got {!r}".format(where, value))
    if count is not None and len(value) != count:
        raise ConfigError("{}: expected {} values, got {}".format(where, count, len(value)))
    return [_number("{}[{}]".format(where, k), v) for k, v in enumerate(value)]


def _grid(where, value):
    """A list of numbers or a {start, stop, num} range (endpoints included)."""
    if isinstance(value, dict):
        unknown = set(value) - {"start", "stop", "num"}
        if unknown or len(value) != 3:
            raise ConfigError("{}: a range needs exactly start, stop and num".format(where))
        return {
            "start": _number(where + ".start", value["start"]),
            "stop":  _number(where + ".stop",  value["stop"]),
            "num":   _integer(where + ".num",  value["num"]),
        }
    return _numbers(where, value)


def _expand(grid):
    if isinstance(grid, dict):
        return [float(v) for v in np.linspace(grid["start"], grid["stop"], grid["num"])]
    return list(grid)


def _rabi(where, value):
    # A Rabi amplitude is a number or {abs, phase} with the phase in radians.
    if isinstance(value, dict):
        if set(value) != {"abs", "phase"}:
            raise ConfigError("{}: expected abs and phase".format(where))
        return {"abs": _number(where + ".abs", value["abs"]), "phase": _number(where + ".phase", value["phase"])}
    return _number(where, value)


def _rabi_complex(value):
    if isinstance(value, dict):
        if value["phase"] == 0:
            return complex(value["abs"])
        return complex(value["abs"]*math.cos(value["phase"]), value["abs"]*math.sin(value["phase"]))
    return complex(value)

# Configuration sections ---------------------------------------------------------------------------

class Field:
    def __init__(self, attr, parse, default=None, key=None):
        self.attr    = attr
        self.parse   = parse
        self.default = default
        self.key     = attr if key is None else key


class Section(Settings):
    """A YAML mapping with a fixed set of typed fields."""
    name   = ""
    fields = []

    def __init__(self, **kwargs):
        for f in self.fields:
            setattr(self, f.attr, kwargs.pop(f.attr, f.default))
        if kwargs:
            raise TypeError("Unknown fields {}".format(", ".join(sorted(kwargs))))

    @classmethod
    def from_dict(cls, d):
        if d is None:
            d = dict()
        if not isinstance(d, dict):
            raise ConfigError("{}: expected a mapping, got {!r}".format(cls.name, d))
        known   = {f.key: f for f in cls.fields}
        unknown = set(d) - set(known)
        if unknown:
            raise ConfigError("{}: unknown field(s) {}".format(cls.name, ", ".join(sorted(map(str, unknown)))))
        kwargs = dict()
        for key, value in d.items():
            f = known[key]
            if value is None and f.default is None:
                continue
            kwargs[f.attr] = f.parse("{}.{}".format(cls.name, key), value)
        return cls(**kwargs)

    def as_dict(self):
        return {f.key: getattr(self, f.attr) for f in self.fields}


def _channel(where, value):
    if not isinstance(value, dict):
        raise ConfigError("{}: expected a mapping".format(where))
    allowed = {"g", "g_collective", "omega_rabi", "delta", "kappa"}
    unknown = set(value) - allowed
    if unknown:
        raise ConfigError("{}: unknown field(s) {}".format(where, ", ".join(sorted(unknown))))
    if ("g" in value) == ("g_collective" in value):
        raise ConfigError("{}: give exactly one of g and g_collective".format(where))
    for key in ["omega_rabi", "delta", "kappa"]:
        if key not in value:
            raise ConfigError("{}: missing {}".format(where, key))
    coupling = "g" if "g" in value else "g_collective"
    omega    = value["omega_rabi"]
    if not isinstance(omega, list) or len(omega) != 2:
        raise ConfigError("{}.omega_rabi: expected 2 entries".format(where))
    return {
        coupling:     _numbers("{}.{}".format(where, coupling), value[coupling], 2),
        "omega_rabi": [_rabi("{}.omega_rabi[{}]".format(where, k), o) for k, o in enumerate(omega)],
        "delta":      _numbers(where + ".delta", value["delta"], 2),
        "kappa":      _number(where + ".kappa", value["kappa"]),
    }


class DeviceConfig(Section):
    name   = "device"
    fields = [
        Field("preset",       _optional_string),
        Field("n_spins",      _number, 1e12),
        Field("kappa",        _number, 0.1),
        Field("gamma_dep",    _number, 0.0),
        Field("delta_b",      _optional_number),
        Field("regime_ratio", _number, 10.0),
        Field("channel_a",    _channel),
        Field("channel_b",    _channel),
        Field("label",        _optional_string),
    ]

    def to_device(self):
        explicit = self.channel_a is not None or self.channel_b is not None
        if self.preset is not None:
            if explicit:
                raise ConfigError("device: give either a preset or channel_a/channel_b, not both")
            return lmg_device.device_preset(self.preset, n_spins=self.n_spins, kappa=self.kappa,
                gamma_dep=self.gamma_dep, delta_b=self.delta_b)
        if self.channel_a is None or self.channel_b is None:
            raise ConfigError("device: needs a preset or both channel_a and channel_b")
        a, b = self.channel_a, self.channel_b
        if ("g" in a) != ("g" in b):
            raise ConfigError("device: channel_a and channel_b must both use g or both g_collective")
        coupling = "g" if "g" in a else "g_collective"
        return lmg_device.PhysicalDeviceParams(
            n_spins    = self.n_spins,
            omega_rabi = [_rabi_complex(o) for o in a["omega_rabi"] + b["omega_rabi"]],
            delta      = a["delta"] + b["delta"],
            kappa      = (a["kappa"], b["kappa"]),
            gamma_dep  = self.gamma_dep,
            delta_b    = self.delta_b,
            label      = self.label,
            **{coupling: a[coupling] + b[coupling]})


class SweepConfig(Section):
    name   = "sweep"
    fields = [
        Field("lambdas",   _grid),
        Field("axis",      _string, "gamma_b"),
        Field("values",    _grid),
        Field("h",         _number, 1.0),
        Field("gamma_b",   _number, 0.0),
        Field("gamma_dep", _number, 0.0),
    ]


class SqueezeConfig(Section):
    name   = "squeeze"
    fields = [
        Field("lam",             _number, 1.0, key="lambda"),
        Field("h",               _number, 0.0),
        Field("gamma_a",         _number, 0.001),
        Field("gamma_b",         _number, 0.001),
        Field("gamma_dep",       _number, 0.02),
        Field("n_spins",         _number, 1e12),
        Field("t_end",           _positive, 0.8),
        Field("dt",              _positive, 1e-3),
        Field("n_max",           _positive_integer, 60),
        Field("grid",            _boolean, False),
        Field("companion_dicke", _optional_integer),
    ]

    def params(self):
        return lmgmap.LmgParams.from_dimensionless(h=self.h, lam=self.lam, chi=-1.0,
            gamma_a=self.gamma_a, gamma_b=self.gamma_b, gamma_dep=self.gamma_dep, n_spins=self.n_spins)


_variant_chi = {"two-axis": -1.0, "isotropic": 1.0, "one-axis": 0.0}

class DickeConfig(Section):
    name   = "dicke"
    fields = [
        Field("n_spins",   _integer, 10),
        Field("variant",   _string, "two-axis"),
        Field("chi",       _optional_number),
        Field("h",         _number, 1.0),
        Field("lam",       _number, 0.0, key="lambda"),
        Field("gamma_a",   _number, 0.0),
        Field("gamma_b",   _number, 0.0),
        Field("gamma_dep", _number, 0.0),
        Field("theta",     _number, 0.0),
        Field("phi",       _number, 0.0),
        Field("t_end",     _positive, 1.0),
        Field("dt",        _positive, 1e-3),
        Field("samples",   _positive_integer, 200),
        Field("cap",       _integer, dicke.DIMENSION_CAP),
    ]

    def params(self):
        if self.variant in _variant_chi:
            chi = _variant_chi[self.variant] if self.chi is None else self.chi
        elif self.variant == "generic":
            if self.chi is None:
                raise ConfigError("dicke: the generic variant needs chi")
            chi = self.chi
        else:
            raise ConfigError("dicke: unknown variant {}, expected one of {}".format(
                self.variant, ", ".join(lmgmap.variants)))
        return lmgmap.LmgParams.from_dimensionless(h=self.h, lam=self.lam, chi=chi,
            gamma_a=self.gamma_a, gamma_b=self.gamma_b, gamma_dep=self.gamma_dep, n_spins=self.n_spins)

# Run configuration --------------------------------------------------------------------------------

class RunConfig(Settings):
    sections = {"device": DeviceConfig, "sweep": SweepConfig, "squeeze": SqueezeConfig, "dicke": DickeConfig}

    def __init__(self, command, mode="paper", solver="moments", threads=1, out=None,
                 device=None, sweep=None, squeeze=None, dicke=None):
        if command not in commands:
            raise ConfigError("Unknown command {}, expected one of {}".format(command, ", ".join(commands)))
        if mode not in semiclassical.modes:
            raise ConfigError("Unknown mode {}, expected one of {}".format(mode, ", ".join(semiclassical.modes)))
        if solver not in hpboson.solvers:
            raise ConfigError("Unknown solver {}, expected one of {}".format(solver, ", ".join(hpboson.solvers)))
        if threads < 0:
            raise ConfigError("threads must be nonnegative, got {}".format(threads))
        self.set_attributes(locals())

    def section(self, name):
        # Absent sections fall back to their defaults.
        s = getattr(self, name)
        return self.sections[name]() if s is None else s

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigError("configuration must be a mapping, got {!r}".format(d))
        known   = {"command", "mode", "solver", "threads", "out"} | set(cls.sections)
        unknown = set(d) - known
        if unknown:
            raise ConfigError("unknown top-level field(s) {}".format(", ".join(sorted(map(str, unknown)))))
        if "command" not in d:
            raise ConfigError("missing field: command")
        kwargs = dict(
            command = _string("command", d["command"]),
            mode    = _string("mode",    d.get("mode", "paper")),
            solver  = _string("solver",  d.get("solver", "moments")),
            threads = _integer("threads", d.get("threads", 1)),
            out     = _optional_string("out", d.get("out")),
        )
        for name, section_cls in cls.sections.items():
            if name in d:
                kwargs[name] = section_cls.from_dict(d[name])
        return cls(**kwargs)

    @classmethod
    def load_yaml(cls, path):
        try:
            with open(path) as f:
                description = yaml.safe_load(f)
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            where = " at line {}".format(mark.line + 1) if mark is not None else ""
            raise ConfigError("{}: invalid YAML{}: {}".format(path, where, getattr(e, "problem", e)))
        except OSError as e:
            raise ConfigError("cannot read {}: {}".format(path, e))
        return cls.from_dict(description)

    def as_dict(self):
        d = {"command": self.command, "mode": self.mode, "solver": self.solver,
             "threads": self.threads, "out": self.out}
        for name in self.sections:
            s = getattr(self, name)
            if s is not None:
                d[name] = s.as_dict()
        return d

    def dump_yaml(self):
        return yaml.safe_dump(self.as_dict(), sort_keys=False)

# Output -------------------------------------------------------------------------------------------

def _require_out(config):
    if config.out is None:
        raise ConfigError("{}: no output path, use --out or set out in the config".format(config.command))
    return config.out


def write_artifact(path, content, config):
    atomic_write(path, content)
    sidecar = {
        "config":  config.as_dict(),
        "version": litelmg.__version__,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    atomic_write(path + ".json", json.dumps(sidecar, indent=2) + "\n")
    logger.info("Wrote %s", path)

# Commands -----------------------------------------------------------------------------------------

def cmd_params(config):
    dc = config.section("device")
    p  = dc.to_device()
    e  = lmg_device.effective_raman_params(p)
    warnings = lmg_device.validate_regime(p, e, dc.regime_ratio)
    lmg = lmgmap.lmg_params_from_device(p, e)
    record = {
        "device":          p.as_record(),
        "effective":       e.as_record(),
        "lmg":             lmg.as_record(),
        "variant":         lmgmap.classify_variant(lmg),
        "regime_warnings": [w.as_record() for w in warnings],
    }
    text = json.dumps(record, indent=2) + "\n"
    print(text, end="")
    if config.out is not None:
        write_artifact(config.out, text, config)
    return record


def cmd_phase_sweep(config):
    out = _require_out(config)
    sc  = config.section("sweep")
    if sc.lambdas is None or sc.values is None:
        raise ConfigError("sweep: lambdas and values are required")
    points = semiclassical.sweep_phase_diagram(
        lambdas   = _expand(sc.lambdas),
        axis      = sc.axis,
        values    = _expand(sc.values),
        h         = sc.h,
        gamma_b   = sc.gamma_b,
        gamma_dep = sc.gamma_dep,
        mode      = config.mode,
        threads   = config.threads)
    write_artifact(out, semiclassical.sweep_csv(points), config)
    return points


def _log_window(label, times, xi2):
    t_min, xi2_min, t_exit = squeezing.squeezing_window(times, xi2)
    db = squeezing.to_db(xi2_min) if xi2_min > 0 else -math.inf
    logger.info("%s: min xi^2 = %.4g (%.2f dB) at t = %.4g, back to >= 1 at %s",
        label, xi2_min, db, t_min, "never" if t_exit is None else "{:.4g}".format(t_exit))


def _companion_dicke(sc, n_spins, path, config):
    p   = sc.params().replace(n_spins=float(n_spins))
    ops = dicke.build_operators(n_spins)
    H   = dicke.build_lmg_hamiltonian(ops, p)
    channels = dicke.reduced_dissipators(ops, p, "two-axis")
    # The boson vacuum is the lowest-weight state |j, -j>.
    rho0 = dicke.coherent_spin_state(n_spins, math.pi, 0.0)
    tr   = dicke.evolve_master(rho0, H, channels, sc.t_end, sc.dt, ops=ops)
    xi2  = squeezing.trajectory_squeezing(tr.first, tr.second, n_spins)
    rows = [[float(t), float(v), float(squeezing.to_db(v))] for t, v in zip(tr.times, xi2)]
    write_artifact(path, csv_content(["t", "xi2", "xi2_db"], rows), config)
    _log_window("Dicke N = {}".format(n_spins), tr.times, xi2)
    return tr


def cmd_squeeze(config):
    out = _require_out(config)
    sc  = config.section("squeeze")
    if sc.grid:
        if config.solver != "moments":
            raise ConfigError("squeeze: the grid runs on the moment solver only")
        results = hpboson.run_rate_grid(sc.t_end, sc.dt, lam=sc.lam, h=sc.h, threads=config.threads)
        for curve, tr in results:
            _log_window("Gamma = {:g}, gamma_dep = {:g}".format(curve.gamma, curve.gamma_dep), tr.times, tr.xi2)
        write_artifact(out, hpboson.squeeze_grid_csv(results), config)
    else:
        p = sc.params()
        if config.solver == "moments":
            results = hpboson.evolve_moments(hpboson.SecondMoments.vacuum(), p, sc.t_end, sc.dt)
        else:
            results = hpboson.evolve_fock(hpboson.FockDensityMatrix.vacuum(sc.n_max), p, sc.t_end, sc.dt)
        _log_window("HP {}".format(config.solver), results.times, results.xi2)
        write_artifact(out, hpboson.squeeze_csv(results, config.solver), config)
    if sc.companion_dicke is not None:
        root, ext = os.path.splitext(out)
        _companion_dicke(sc, sc.companion_dicke, root + "_dicke" + (ext or ".csv"), config)
    return results


def cmd_evolve_dicke(config):
    out  = _require_out(config)
    dc   = config.section("dicke")
    p    = dc.params()
    ops  = dicke.build_operators(dc.n_spins, dc.cap)
    H    = dicke.build_lmg_hamiltonian(ops, p)
    variant  = "two-axis" if dc.variant == "generic" else dc.variant
    channels = dicke.reduced_dissipators(ops, p, variant)
    rho0 = dicke.coherent_spin_state(dc.n_spins, dc.theta, dc.phi, dc.cap)
    tr   = dicke.evolve_master(rho0, H, channels, dc.t_end, dc.dt, ops=ops, samples=dc.samples)
    write_artifact(out, dicke.master_csv(tr), config)
    j = dc.n_spins/2
    logger.info("Final <J>/j = (%.4g, %.4g, %.4g)", *(tr.first[-1]/j))
    return tr


_handlers = {
    "params":       cmd_params,
    "phase-sweep":  cmd_phase_sweep,
    "squeeze":      cmd_squeeze,
    "evolve-dicke": cmd_evolve_dicke,
}

# Command line -------------------------------------------------------------------------------------

def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config",    default=None,               help="YAML run configuration")
    common.add_argument("--out",       default=None,               help="Output file")
    common.add_argument("--mode",      choices=semiclassical.modes, help="Steady-state solver (default=paper)")
    common.add_argument("--solver",    choices=hpboson.solvers,    help="Squeezing solver (default=moments)")
    common.add_argument("--threads",   default=None, type=int,     help="Parallel jobs (0 uses CPU count)")
    common.add_argument("--log-level", default="info",             help="Set logging verbosity",
        choices=["critical", "error", "warning", "info", "debug"])

    parser = argparse.ArgumentParser(description="LiteLMG: NV-ensemble/cavity LMG simulator")
    sub    = parser.add_subparsers(dest="command", required=True)

    params = sub.add_parser("params", parents=[common], help="Effective LMG parameters of a device")
    params.add_argument("--preset", choices=lmg_device.preset_variants, help="Device preset")
    params.add_argument("--n",      default=None, help="Number of spins (e.g. 1e12)")
    params.add_argument("--kappa",  default=None, help="Cavity decay rate (2pi x MHz)")

    sub.add_parser("phase-sweep", parents=[common], help="Semiclassical phase diagram")

    squeeze = sub.add_parser("squeeze", parents=[common], help="Holstein-Primakoff squeezing dynamics")
    squeeze.add_argument("--grid",            action="store_true",  help="Run the whole (Gamma, gamma_dep) grid")
    squeeze.add_argument("--companion-dicke", default=None, type=int, help="Also run an exact Dicke evolution at this N")
    squeeze.add_argument("--t-end",           default=None,          help="End time (units of 1/gamma)")

    sub.add_parser("evolve-dicke", parents=[common], help="Exact Dicke-sector master equation")
    return parser


def _override(d, section, key, value):
    if value is not None:
        d.setdefault(section, dict())
        if d[section] is None:
            d[section] = dict()
        d[section][key] = value


def build_config(args):
    """RunConfig from the optional YAML file, with command-line flags taking precedence."""
    d = dict()
    if args.config is not None:
        d = RunConfig.load_yaml(args.config).as_dict()
        if d["command"] != args.command:
            raise ConfigError("{} is a {} configuration, not {}".format(args.config, d["command"], args.command))
    d["command"] = args.command
    for key in ["out", "mode", "solver", "threads"]:
        value = getattr(args, key)
        if value is not None:
            d[key] = value
    if args.command == "params":
        _override(d, "device", "preset",  args.preset)
        _override(d, "device", "n_spins", args.n)
        _override(d, "device", "kappa",   args.kappa)
        if args.preset is not None:
            for key in ["channel_a", "channel_b"]:
                d["device"].pop(key, None)
    if args.command == "squeeze":
        if args.grid:
            _override(d, "squeeze", "grid", True)
        _override(d, "squeeze", "companion_dicke", args.companion_dicke)
        _override(d, "squeeze", "t_end",           args.t_end)
    return RunConfig.from_dict(d)


def main(argv=None):
    args = _parser().parse_args(argv)

    logging.basicConfig(format="%(levelname)s:%(name)s: %(message)s")
    logging.getLogger().setLevel(getattr(logging, args.log_level.upper()))

    try:
        config = build_config(args)
        _handlers[config.command](config)
    except ConfigError as e:
        logger.error("Configuration error: %s", e)
        return 2
    except ValueError as e:
        logger.error("Invalid parameter: %s", e)
        return 2
    except NumericalError as e:
        logger.error("Numerical failure: %s", e)
        return 3
    return 0

if __name__ == "__main__":
    sys.exit(main())
