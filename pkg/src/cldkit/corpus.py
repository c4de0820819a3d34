"""Bundled models, scenarios, and golden trajectories.

The corpus ships inside the package; ``corpus_root()`` points at it.
Golden CSVs are pinned by sha256 in the MANIFEST file, and every model
and scenario must load cleanly, so a corrupted installation fails fast
rather than producing quietly wrong analyses.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from . import dsl, scenario
from .errors import CorpusCorruptError
from .model import Model, validate

# scenario name -> model file it runs against
_SCENARIO_MODEL = {
    "baseline": "hei-ai",
    "cost-cutting": "hei-ai",
    "aip-shock": "hei-ai",
    "automation-ramp": "hei-ai",
    "b2-settle": "b2",
}

_DESCRIPTIONS = {
    "models/hei-ai.cld": "canonical 27-variable higher-education AI model",
    "models/hei-ai-unsigned.cld": "same structure with every polarity unknown",
    "models/two-cycle.cld": "minimal two-variable reinforcing pair",
    "models/b2.cld": "three-variable balancing sub-model",
    "scenarios/baseline.scn": "untuned reference run of the canonical model",
    "scenarios/cost-cutting.scn": "weak reinvestment of revenue into education quality",
    "scenarios/aip-shock.scn": "integrity-problem pulse with countermeasures active",
    "scenarios/automation-ramp.scn": "rising automation with the skills channel open",
    "scenarios/b2-settle.scn": "balancing sub-model settling to equilibrium",
    "golden/baseline.csv": "frozen baseline trajectory",
    "golden/cost-cutting.csv": "frozen cost-cutting trajectory",
    "golden/aip-shock.csv": "frozen aip-shock trajectory",
    "golden/automation-ramp.csv": "frozen automation-ramp trajectory",
    "golden/b2-settle.csv": "frozen b2-settle trajectory",
}


@dataclass(frozen=True)
class CorpusEntry:
    path: str  # relative to corpus_root()
    kind: str  # "model" | "scenario" | "golden"
    description: str


def corpus_root() -> Path:
    return Path(str(resources.files("cldkit"))) / "corpus"


def corpus_path(relative: str) -> Path:
    return corpus_root() / relative


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CorpusCorruptError(str(path), f"unreadable: {exc}") from None


@lru_cache(maxsize=None)
def _load_model(name: str) -> Model:
    rel = f"models/{name}.cld"
    result = dsl.parse_model(_read(corpus_path(rel)))
    if result.model is None:
        first = result.errors[0]
        raise CorpusCorruptError(rel, f"parse failed: {first.render()}")
    problems = validate(result.model)
    if problems:
        raise CorpusCorruptError(rel, f"invalid: {problems[0]}")
    return result.model


def load_model(name: str) -> Model:
    """A bundled model by bare name, e.g. ``hei-ai``."""
    return _load_model(name)


def load_scenario(name: str) -> scenario.ScenarioSpec:
    """A bundled scenario by bare name, bound to its model."""
    rel = f"scenarios/{name}.scn"
    model = load_model(_SCENARIO_MODEL[name])
    result = scenario.parse_scenario(_read(corpus_path(rel)), model)
    if result.spec is None:
        first = result.errors[0]
        raise CorpusCorruptError(rel, f"parse failed: {first.render()}")
    return result.spec


def scenario_model(name: str) -> Model:
    """The model a bundled scenario runs against."""
    return load_model(_SCENARIO_MODEL[name])


def canonical_hei_model() -> Model:
    return load_model("hei-ai")


def read_manifest() -> dict[str, str]:
    """MANIFEST entries as {relative path: sha256 hex}."""
    entries = {}
    for line in _read(corpus_path("MANIFEST")).splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            digest, rel = line.split(None, 1)
        except ValueError:
            raise CorpusCorruptError("MANIFEST", f"malformed line: {line!r}") from None
        entries[rel.strip()] = digest
    return entries


def load_corpus() -> list[CorpusEntry]:
    """Enumerate and check every bundled entry.

    Models must parse and validate, scenarios must bind to their model,
    and goldens must match their manifest hash.
    """
    manifest = read_manifest()
    entries = []
    for rel, description in _DESCRIPTIONS.items():
        kind = rel.split("/", 1)[0]
        kind = {"models": "model", "scenarios": "scenario", "golden": "golden"}[kind]
        if kind == "model":
            load_model(Path(rel).stem)
        elif kind == "scenario":
            load_scenario(Path(rel).stem)
        else:
            expected = manifest.get(rel)
            if expected is None:
                raise CorpusCorruptError(rel, "missing from MANIFEST")
            data = corpus_path(rel)
            try:
                digest = hashlib.sha256(data.read_bytes()).hexdigest()
            except OSError as exc:
                raise CorpusCorruptError(rel, f"unreadable: {exc}") from None
            if digest != expected:
                raise CorpusCorruptError(rel, "sha256 mismatch against MANIFEST")
        entries.append(CorpusEntry(rel, kind, description))
    return entries
