"""Declarative pipeline configuration (YAML) with line-referenced errors."""

import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import yaml

from .ensemble import VotingSpec, is_composite
from .errors import ConfigurationError, RainerError
from .features import FeatureStrategy
from .ingest import BOM_SCHEMA, CATEGORICAL, DATE, LABEL, NUMERIC
from .models import REGISTRY, ModelSpec
from .tuning import METRICS, ParamGrid, SplitSpec

DATA_ENV = "RAINER_DATA"
_KINDS = (NUMERIC, CATEGORICAL, DATE, LABEL)
DEFAULT_STRATEGIES = tuple(s.value for s in FeatureStrategy)
DEFAULT_CAPS = {"Rainfall": 3.2, "WindSpeed9am": 55.0, "WindSpeed3pm": 57.0}

_SECTIONS = {
    "data": {"input", "schema", "label"},
    "preprocess": {"missing_threshold", "impute", "caps", "binary_columns", "balance"},
    "features": {"strategies", "correlation_threshold", "drop_correlated"},
    "split": {"ratios", "stratified"},
    "tuning": {"k", "metric", "budget"},
    "models": None,
    "reduce": {"loadings_components", "tsne"},
    "output": None,
    "seed": None,
    "threads": None,
}
_TSNE_KEYS = {"sample", "perplexity", "n_iter", "learning_rate", "early_exaggeration"}
_MODEL_KEYS = {"name", "params", "grid", "voting", "weights", "members"}


@dataclass(frozen=True)
class ModelEntry:
    name: str  # algorithm id, or "+"-joined ids for a voting ensemble
    params: dict = field(default_factory=dict)
    grid: dict = None
    voting: str = "soft"
    weights: tuple = None
    members: dict = field(default_factory=dict)  # composite: member id -> params

    @property
    def composite(self):
        return is_composite(self.name)


@dataclass(frozen=True)
class TsneSettings:
    sample: int = 2000
    perplexity: float = 30.0
    n_iter: int = 1000
    learning_rate: object = "auto"
    early_exaggeration: float = 12.0


@dataclass(frozen=True)
class PipelineConfig:
    input: str = None
    schema: dict = field(default_factory=lambda: dict(BOM_SCHEMA))
    label: str = "RainTomorrow"
    missing_threshold: float = 0.30
    impute: str = "full"
    caps: dict = field(default_factory=lambda: dict(DEFAULT_CAPS))
    binary_columns: tuple = ("RainToday",)
    balance: str = "undersample"
    strategies: tuple = DEFAULT_STRATEGIES
    correlation_threshold: float = 0.95
    drop_correlated: bool = False
    split_ratios: tuple = (0.8, 0.1, 0.1)
    stratified: bool = True
    k: int = 5
    metric: str = "accuracy"
    budget: int = 10_000
    models: tuple = ()
    loadings_components: int = 2
    tsne: TsneSettings = TsneSettings()
    output: str = "out"
    seed: int = 42
    threads: int = 1
    source: str = "<config>"

    def split_spec(self, seed=None):
        return SplitSpec(self.split_ratios, self.stratified, self.seed if seed is None else seed)

    def summary(self):
        """JSON-friendly view for the report (paths and source omitted)."""
        out = asdict(self)
        for key in ("input", "source", "output", "schema"):
            out.pop(key)
        return out


class _Locator:
    """Maps key paths in the YAML document to 1-based line numbers."""

    def __init__(self, root, source):
        self.source = source
        self.lines = {}
        if root is not None:
            self._walk(root, ())

    def _walk(self, node, path):
        self.lines.setdefault(path, node.start_mark.line + 1)
        if isinstance(node, yaml.MappingNode):
            for key, value in node.value:
                self.lines[path + (key.value,)] = key.start_mark.line + 1
                self._walk(value, path + (key.value,))
        elif isinstance(node, yaml.SequenceNode):
            for i, item in enumerate(node.value):
                self._walk(item, path + (i,))

    def fail(self, path, message):
        probe = tuple(path)
        while probe not in self.lines and probe:
            probe = probe[:-1]
        line = self.lines.get(probe)
        where = f"{self.source}:{line}" if line else self.source
        dotted = ".".join(str(p) for p in path)
        raise ConfigurationError(f"{where}: {dotted + ': ' if dotted else ''}{message}")


def _mapping(loc, value, path, allowed=None):
    if value is None:
        return {}
    if not isinstance(value, dict):
        loc.fail(path, f"expected a mapping, got {type(value).__name__}")
    if allowed is not None:
        for key in value:
            if key not in allowed:
                loc.fail(path + (key,), f"unknown key; expected one of {sorted(allowed)}")
    return value


def _number(loc, value, path, lo=None, hi=None, integer=False):
    ok = isinstance(value, int) if integer else isinstance(value, (int, float))
    if isinstance(value, bool) or not ok:
        loc.fail(path, f"expected {'an integer' if integer else 'a number'}, got {value!r}")
    if (lo is not None and value < lo) or (hi is not None and value > hi):
        loc.fail(path, f"value {value!r} outside [{lo}, {hi}]")
    return value


def _choice(loc, value, path, choices):
    if value not in choices:
        loc.fail(path, f"{value!r} is not one of {list(choices)}")
    return value


def _parse_model(loc, raw, path, seed, budget):
    if isinstance(raw, str):
        raw = {"name": raw}
    raw = _mapping(loc, raw, path, _MODEL_KEYS)
    if "name" not in raw:
        loc.fail(path, "model entry needs a 'name'")
    name = str(raw["name"]).strip().lower()
    params = dict(_mapping(loc, raw.get("params"), path + ("params",)))
    grid = raw.get("grid")
    if is_composite(name):
        for key in ("params", "grid"):
            if key in raw:
                loc.fail(path + (key,), "voting ensembles take per-member settings under 'members'")
        try:
            spec = VotingSpec.parse(name, raw.get("voting", "soft"), raw.get("weights"))
        except RainerError as exc:
            loc.fail(path, str(exc))
        members = dict(_mapping(loc, raw.get("members"), path + ("members",), set(spec.members)))
        for member in spec.members:
            _model_spec(loc, member, members.get(member) or {}, path + ("members", member), seed)
        return ModelEntry(name, {}, None, spec.mode, spec.weights,
                          {m: dict(members.get(m) or {}) for m in spec.members})
    for key in ("voting", "weights", "members"):
        if key in raw:
            loc.fail(path + (key,), "only voting ensembles ('a+b+c') take this key")
    _model_spec(loc, name, params, path + ("params",), seed)
    if grid is not None:
        grid = _mapping(loc, grid, path + ("grid",), set(REGISTRY.get(name, {})))
        try:
            combos = ParamGrid(dict(grid), budget).combinations()
        except RainerError as exc:
            loc.fail(path + ("grid",), str(exc))
        for combo in combos:
            _model_spec(loc, name, {**params, **combo}, path + ("grid",), seed)
        grid = {k: list(v) for k, v in grid.items()}
    return ModelEntry(name, params, grid)


def _model_spec(loc, name, params, path, seed):
    try:
        return ModelSpec(name, params, seed)
    except RainerError as exc:
        loc.fail(path, str(exc))


def parse_config(text, source="<config>", base_dir=None):
    """Validate a YAML document into a PipelineConfig; nothing runs until
    this succeeds."""
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = f":{mark.line + 1}" if mark else ""
        raise ConfigurationError(f"{source}{line}: invalid YAML: {exc}") from None
    loc = _Locator(root, source)
    data = _mapping(loc, data, (), set(_SECTIONS))
    out = {"source": source}

    seed = _number(loc, data.get("seed", 42), ("seed",), 0, integer=True)
    out["seed"] = seed
    out["threads"] = _number(loc, data.get("threads", 1), ("threads",), 1, integer=True)
    if "output" in data:
        out["output"] = str(data["output"])

    d = _mapping(loc, data.get("data"), ("data",), _SECTIONS["data"])
    if "input" in d:
        path = Path(str(d["input"]))
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        out["input"] = str(path)
    schema = dict(BOM_SCHEMA)
    if "schema" in d and d["schema"] != "bom":
        raw_schema = _mapping(loc, d["schema"], ("data", "schema"))
        for col, kind in raw_schema.items():
            _choice(loc, kind, ("data", "schema", col), _KINDS)
        schema = dict(raw_schema)
    out["schema"] = schema
    label = d.get("label", "RainTomorrow")
    if schema.get(label) != LABEL:
        loc.fail(("data", "label"), f"{label!r} is not a label column of the schema")
    out["label"] = label

    p = _mapping(loc, data.get("preprocess"), ("preprocess",), _SECTIONS["preprocess"])
    if "missing_threshold" in p:
        out["missing_threshold"] = _number(loc, p["missing_threshold"],
                                           ("preprocess", "missing_threshold"), 0, 1)
    if "impute" in p:
        out["impute"] = _choice(loc, p["impute"], ("preprocess", "impute"), ("full", "train"))
    if "balance" in p:
        out["balance"] = _choice(loc, p["balance"], ("preprocess", "balance"),
                                 ("upsample", "undersample", "none"))
    if "caps" in p:
        caps = _mapping(loc, p["caps"], ("preprocess", "caps"))
        for col, cap in caps.items():
            if schema.get(col) != NUMERIC:
                loc.fail(("preprocess", "caps", col), "caps apply only to numeric schema columns")
            _number(loc, cap, ("preprocess", "caps", col))
        out["caps"] = {c: float(v) for c, v in caps.items()}
    if "binary_columns" in p:
        cols = p["binary_columns"] or []
        for i, col in enumerate(cols):
            if schema.get(col) != CATEGORICAL:
                loc.fail(("preprocess", "binary_columns", i), f"{col!r} is not a categorical column")
        out["binary_columns"] = tuple(cols)

    f = _mapping(loc, data.get("features"), ("features",), _SECTIONS["features"])
    if "strategies" in f:
        strategies = f["strategies"]
        if not isinstance(strategies, list) or not strategies:
            loc.fail(("features", "strategies"), "expected a non-empty list")
        for i, s in enumerate(strategies):
            _choice(loc, s, ("features", "strategies", i), DEFAULT_STRATEGIES)
        out["strategies"] = tuple(strategies)
    if "correlation_threshold" in f:
        t = _number(loc, f["correlation_threshold"], ("features", "correlation_threshold"), 0, 1)
        if not 0 < t < 1:
            loc.fail(("features", "correlation_threshold"), "must lie strictly between 0 and 1")
        out["correlation_threshold"] = t
    if "drop_correlated" in f:
        if not isinstance(f["drop_correlated"], bool):
            loc.fail(("features", "drop_correlated"), "expected true or false")
        out["drop_correlated"] = f["drop_correlated"]

    s = _mapping(loc, data.get("split"), ("split",), _SECTIONS["split"])
    if "ratios" in s:
        ratios = s["ratios"]
        if not isinstance(ratios, list):
            loc.fail(("split", "ratios"), "expected a list of three fractions")
        try:
            SplitSpec(tuple(ratios))
        except (RainerError, TypeError) as exc:
            loc.fail(("split", "ratios"), str(exc))
        out["split_ratios"] = tuple(float(r) for r in ratios)
    if "stratified" in s:
        out["stratified"] = bool(s["stratified"])

    t = _mapping(loc, data.get("tuning"), ("tuning",), _SECTIONS["tuning"])
    if "k" in t:
        out["k"] = _number(loc, t["k"], ("tuning", "k"), 2, integer=True)
    if "metric" in t:
        out["metric"] = _choice(loc, t["metric"], ("tuning", "metric"), METRICS)
    budget = _number(loc, t.get("budget", 10_000), ("tuning", "budget"), 1, integer=True)
    out["budget"] = budget

    models = data.get("models") or []
    if not isinstance(models, list):
        loc.fail(("models",), "expected a list of model entries")
    entries = [_parse_model(loc, m, ("models", i), seed, budget) for i, m in enumerate(models)]
    names = [e.name for e in entries]
    for i, name in enumerate(names):
        if name in names[:i]:
            loc.fail(("models", i), f"model {name!r} is listed twice")
    out["models"] = tuple(entries)

    r = _mapping(loc, data.get("reduce"), ("reduce",), _SECTIONS["reduce"])
    if "loadings_components" in r:
        out["loadings_components"] = _number(loc, r["loadings_components"],
                                             ("reduce", "loadings_components"), 1, integer=True)
    ts = _mapping(loc, r.get("tsne"), ("reduce", "tsne"), _TSNE_KEYS)
    tsne = TsneSettings()
    if "sample" in ts:
        tsne = replace(tsne, sample=_number(loc, ts["sample"], ("reduce", "tsne", "sample"), 4,
                                            integer=True))
    if "perplexity" in ts:
        tsne = replace(tsne, perplexity=float(_number(loc, ts["perplexity"],
                                                      ("reduce", "tsne", "perplexity"), 1e-9)))
    if "n_iter" in ts:
        tsne = replace(tsne, n_iter=_number(loc, ts["n_iter"], ("reduce", "tsne", "n_iter"), 1,
                                            integer=True))
    if "learning_rate" in ts and ts["learning_rate"] != "auto":
        tsne = replace(tsne, learning_rate=float(_number(
            loc, ts["learning_rate"], ("reduce", "tsne", "learning_rate"), 1e-12)))
    if "early_exaggeration" in ts:
        tsne = replace(tsne, early_exaggeration=float(_number(
            loc, ts["early_exaggeration"], ("reduce", "tsne", "early_exaggeration"), 1)))
    if tsne.perplexity >= tsne.sample:
        loc.fail(("reduce", "tsne", "perplexity"), "perplexity must be below the sample size")
    out["tsne"] = tsne
    return PipelineConfig(**out)


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"{path}: cannot read config: {exc.strerror}") from None
    return parse_config(text, str(path), base_dir=path.parent)


def resolve(config, seed=None, out=None, threads=None, environ=os.environ):
    """Apply command-line overrides and the data-path environment variable."""
    changes = {}
    if seed is not None:
        changes["seed"] = int(seed)
    if out is not None:
        changes["output"] = str(out)
    if threads is not None:
        if threads < 1:
            raise ConfigurationError("--threads must be at least 1")
        changes["threads"] = int(threads)
    if environ.get(DATA_ENV):
        changes["input"] = environ[DATA_ENV]
    config = replace(config, **changes)
    if not config.input:
        raise ConfigurationError(f"{config.source}: no input path (set data.input or {DATA_ENV})")
    return config
