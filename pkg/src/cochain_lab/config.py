"""Task configuration: JSON or TOML documents validated into a TaskConfig."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import tomli

from .cochains import DEGREE_CAP, FLAT_CAP
from .groups import DEFAULT_SIZE_CAP

TASKS = ("group-info", "fc-data", "commutant", "cohomology", "split-check", "homotopy-check",
         "restriction-check", "affine-fixed", "fp-h1", "approximation-suite", "appendix-suite")

RANDOMIZED = {"homotopy-check", "restriction-check", "affine-fixed", "approximation-suite", "appendix-suite"}
FP_TASKS = {"fp-h1"}

DEFAULT_EPSILON = 1e-6


class ConfigError(ValueError):
    def __init__(self, code: str, message: str, **extra):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.extra = extra

    def payload(self) -> dict:
        return {"code": self.code, "message": self.message, **self.extra}


@dataclass
class TaskConfig:
    task: str
    group: dict
    module: dict | None
    params: dict = field(default_factory=dict)
    mode: str = "exact"
    seed: int | None = None
    raw: dict = field(default_factory=dict)

    def canonical(self) -> str:
        doc = {"task": self.task, "group": self.group, "module": self.module, "params": self.params,
               "mode": self.mode, "seed": self.seed}
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    def content_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()


def _load(text: str) -> dict:
    text = text.strip()
    if not text:
        raise ConfigError("E_PARSE", "empty document")
    if text.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError("E_PARSE", f"invalid JSON: {e}") from None
    else:
        try:
            doc = tomli.loads(text)
        except tomli.TOMLDecodeError as e:
            raise ConfigError("E_PARSE", f"invalid TOML: {e}") from None
    if not isinstance(doc, dict):
        raise ConfigError("E_PARSE", "top level must be a mapping")
    return doc


def _check_group(group, task):
    if not isinstance(group, dict) or "type" not in group:
        raise ConfigError("E_SPEC", "group spec must be a mapping with a 'type'")
    kind = group["type"]
    if task in FP_TASKS:
        if kind != "fp":
            raise ConfigError("E_SPEC", f"task {task} needs an fp group spec")
        if not isinstance(group.get("generators"), list):
            raise ConfigError("E_SPEC", "fp spec needs a generator list")
        return
    if kind not in ("table", "permutation", "named", "fp"):
        raise ConfigError("E_SPEC", f"unknown group spec type {kind!r}")
    if kind == "table":
        mul = group.get("mul")
        if not isinstance(mul, list) or not mul:
            raise ConfigError("E_SPEC", "table spec needs a nonempty 'mul'")
        if len(mul) > group.get("size_cap", DEFAULT_SIZE_CAP):
            raise ConfigError("E_CAP", f"group order {len(mul)} exceeds size cap", cap=DEFAULT_SIZE_CAP)
    if kind == "permutation" and not isinstance(group.get("generators"), list):
        raise ConfigError("E_SPEC", "permutation spec needs 'generators'")
    if kind == "named" and "name" not in group:
        raise ConfigError("E_SPEC", "named spec needs 'name'")
    if kind == "fp" and task != "affine-fixed":
        raise ConfigError("E_SPEC", f"task {task} needs a finite group")


def parse_config(text: str, mode: str | None = None, seed: int | None = None) -> TaskConfig:
    doc = _load(text)
    task = doc.get("task")
    if task not in TASKS:
        raise ConfigError("E_TASK", f"unknown task {task!r}", known=list(TASKS))
    group = doc.get("group")
    if group is None:
        raise ConfigError("E_SPEC", "missing group spec")
    _check_group(group, task)
    module = doc.get("module")
    if module is not None and not isinstance(module, dict):
        raise ConfigError("E_SPEC", "module spec must be a mapping")
    params = dict(doc.get("params", {}))
    if not isinstance(params, dict):
        raise ConfigError("E_SPEC", "params must be a mapping")
    mode = mode or doc.get("mode", "exact")
    if mode not in ("exact", "float"):
        raise ConfigError("E_SPEC", f"unknown mode {mode!r}")
    if seed is None:
        seed = doc.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int) or seed < 0):
        raise ConfigError("E_SEED", "seed must be a nonnegative integer")
    if task in RANDOMIZED and seed is None:
        raise ConfigError("E_SEED", f"task {task} is randomized and needs a seed")
    cap = params.get("degree_cap", DEGREE_CAP)
    if cap > DEGREE_CAP:
        raise ConfigError("E_CAP", f"degree cap {cap} above the hard cap {DEGREE_CAP}", cap=DEGREE_CAP)
    params.setdefault("degree_cap", cap)
    degrees = params.get("degrees")
    if degrees is None:
        params["degrees"] = list(range(cap + 1)) if task in ("cohomology", "split-check") else [0, 1, 2]
    else:
        if isinstance(degrees, int):
            degrees = [degrees]
        if not all(isinstance(n, int) and n >= 0 for n in degrees):
            raise ConfigError("E_SPEC", "degrees must be nonnegative integers")
        bad = [n for n in degrees if n > cap]
        if bad:
            raise ConfigError("E_CAP", f"degree {max(bad)} above cap {cap}", cap=cap)
        params["degrees"] = list(degrees)
    params.setdefault("epsilon", DEFAULT_EPSILON)
    params.setdefault("flat_cap", FLAT_CAP)
    if params["flat_cap"] > FLAT_CAP:
        raise ConfigError("E_CAP", f"flat size cap above {FLAT_CAP}", cap=FLAT_CAP)
    return TaskConfig(task, group, module, params, mode, seed, doc)
