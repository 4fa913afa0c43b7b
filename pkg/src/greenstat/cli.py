"""
Command-line front end.

Every analysis subcommand loads the CSV, cleans it, runs one analysis and
prints SPSS-layout tables (``--format text``) or a JSON document
(``--format json``). With ``--output-dir`` the report is also written to
disk together with one CSV file per table and, for ``describe``,
``regress`` and ``report``, PNG figures.

Exit codes: 0 success, 2 I/O or parse error, 3 no rows left after
cleaning, 4 analysis error.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import re
import sys
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional

from . import __version__
from . import inference as inf
from . import regression as rg
from . import report as rp
from .errors import AnalysisError, DataError, GreenstatError
from .timeseries import (
    DEFAULT_RANGES,
    DEFAULT_SCHEMA,
    OutlierRule,
    RangeSpec,
    clean,
    parse_outlier_rule,
    parse_predicate,
    read_csv,
    write_csv,
)

log = logging.getLogger("greenstat")

EXIT_OK, EXIT_IO, EXIT_EMPTY, EXIT_ANALYSIS = 0, 2, 3, 4

ALL_VARIABLES = tuple(v.name for v in DEFAULT_SCHEMA)
WEATHER = tuple(v.name for v in DEFAULT_SCHEMA if v.role == "weather")
LEVENE_DEFAULT = ("temperature_c", "irradiance_wm2", "pv_kw")
REGRESS_DEFAULT = ("pv_kw", "load_kw")
BUNDLED = "bundled"

PREDICT_FLAGS = {
    "irradiance": "irradiance_wm2",
    "temperature": "temperature_c",
    "relative_humidity": "relative_humidity_pct",
    "dust": "dust_mgm3",
    "wind_speed": "wind_speed_kmh",
}


class CliExit(Exception):
    def __init__(self, code: int, message: str = ""):
        self.code = code
        self.message = message
        super().__init__(message)


@dataclass
class AnalysisConfig:
    input: str = BUNDLED
    schema: tuple = DEFAULT_SCHEMA
    ranges: RangeSpec = DEFAULT_RANGES
    outlier_rule: OutlierRule = field(default_factory=OutlierRule)
    grouping: str = "rows"
    groups: int = 25
    filter: str = ""
    response: Optional[str] = None
    candidates: tuple = WEATHER
    p_enter: float = 0.05
    format: str = "text"
    output_dir: Optional[str] = None
    variables: Optional[tuple] = None
    bins: str = "sturges"

    def __post_init__(self):
        if not self.input:
            raise CliExit(EXIT_IO, "input path is empty")
        if self.output_dir is not None and not self.output_dir:
            raise CliExit(EXIT_IO, "output directory is empty")
        if not 0.0 < self.p_enter < 1.0:
            raise CliExit(EXIT_ANALYSIS, f"p_enter must lie in (0, 1), got {self.p_enter}")
        if self.groups < 2:
            raise CliExit(EXIT_ANALYSIS, f"group count must be at least 2, got {self.groups}")
        if self.format not in ("text", "json"):
            raise CliExit(EXIT_IO, f"unknown format {self.format!r}")

    @property
    def scheme(self):
        return inf.parse_grouping(self.grouping, self.groups)

    @property
    def bin_rule(self):
        return int(self.bins) if str(self.bins).isdigit() else self.bins


def bundled_csv_path() -> Path:
    return Path(str(resources.files("greenstat") / "data" / "qatar_synthetic.csv"))


def _split(text) -> tuple:
    return tuple(s.strip() for s in re.split(r"[,\s]+", text) if s.strip())


def _read_config_file(path) -> dict:
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=", ":"))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_string("[analysis]\n" + fh.read(), source=str(path))
    except OSError as exc:
        raise CliExit(EXIT_IO, f"cannot read config {path}: {exc.strerror or exc}") from None
    except configparser.Error as exc:
        raise CliExit(EXIT_IO, f"malformed config {path}: {exc}") from None
    return dict(parser["analysis"])


def _coerce(key: str, value: str, ranges: dict):
    try:
        if key.startswith("range."):
            lo, hi = (float(x) for x in _split(value))
            ranges[key[len("range."):]] = (lo, hi)
            return None
        if key in ("groups",):
            return int(value)
        if key == "p_enter":
            return float(value)
        if key == "outlier_rule":
            return parse_outlier_rule(value)
        if key in ("variables", "candidates"):
            return _split(value)
        if key == "output_dir":
            return value
        return value
    except (ValueError, GreenstatError) as exc:
        raise CliExit(EXIT_IO, f"bad config value for {key!r}: {exc}") from None


CONFIG_KEYS = {"input", "outlier_rule", "grouping", "groups", "filter", "response",
               "candidates", "p_enter", "format", "output_dir", "variables", "bins"}


def build_config(args) -> AnalysisConfig:
    """Defaults, overridden by the config file, overridden by flags."""
    values, ranges = {}, dict(DEFAULT_RANGES.bounds)
    if getattr(args, "config", None):
        for key, raw in _read_config_file(args.config).items():
            key = key.replace("-", "_")
            if key not in CONFIG_KEYS and not key.startswith("range."):
                raise CliExit(EXIT_IO, f"unknown config key {key!r}")
            v = _coerce(key, raw, ranges)
            if v is not None:
                values[key] = v
    for key in CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is None:
            continue
        if key == "outlier_rule":
            try:
                flag = parse_outlier_rule(flag)
            except GreenstatError as exc:
                raise CliExit(EXIT_IO, str(exc)) from None
        elif key in ("variables", "candidates"):
            flag = _split(flag)
        values[key] = flag
    try:
        values["ranges"] = RangeSpec(ranges)
    except GreenstatError as exc:
        raise CliExit(EXIT_IO, str(exc)) from None
    return AnalysisConfig(**values)


# -- pipeline ----------------------------------------------------------------

def load(config: AnalysisConfig):
    path = bundled_csv_path() if config.input == BUNDLED else Path(config.input)
    try:
        return read_csv(path, config.schema)
    except OSError as exc:
        raise CliExit(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}") from None
    except DataError as exc:
        raise CliExit(EXIT_IO, f"{path}: {exc}") from None


def load_clean(config: AnalysisConfig):
    raw = load(config)
    try:
        data, report = clean(raw, config.ranges, config.outlier_rule)
    except DataError as exc:
        raise CliExit(EXIT_IO, str(exc)) from None
    if report.empty:
        raise CliExit(EXIT_EMPTY, f"no rows left after cleaning ({report.rows_in} read)")
    log.info("cleaning kept %d of %d rows", report.rows_out, report.rows_in)
    return data, report


def _analysis(func, *args, **kwargs):
    try:
        return func(*args, **kwargs)
    except CliExit:
        raise
    except (GreenstatError, ValueError, KeyError) as exc:
        raise CliExit(EXIT_ANALYSIS, str(exc)) from None


def _emit(report: rp.Report, config: AnalysisConfig, out) -> None:
    text = report.render(config.format)
    out.write(text)
    if config.output_dir:
        root = Path(config.output_dir)
        tables = root / "tables"
        tables.mkdir(parents=True, exist_ok=True)
        suffix = "json" if config.format == "json" else "txt"
        (root / f"report.{suffix}").write_text(text, encoding="utf-8")
        for i, table in enumerate(report.tables, start=1):
            slug = re.sub(r"[^a-z0-9]+", "_", table.title.lower()).strip("_")
            (tables / f"{i:02d}_{slug}.csv").write_text(table.render_csv(), encoding="utf-8")


# -- sections ----------------------------------------------------------------

def describe_section(d, config) -> rp.Report:
    variables = config.variables or ALL_VARIABLES
    report = rp.Report()
    table, data = rp.descriptive_table(d, variables)
    report.add(table, "descriptives", data)
    table, data = rp.boxplot_table(d, variables)
    report.add(table, "boxplots", data)
    tables, data = rp.histogram_tables(d, variables, config.bin_rule)
    for t in tables:
        report.add(t)
    report.data["histograms"] = data
    return report


def correlate_section(d, config) -> rp.Report:
    variables = config.variables or ALL_VARIABLES
    report = rp.Report()
    m = inf.correlation_matrix(d, variables, config.filter or None)
    report.add(rp.correlation_table(d, m, config.filter), "correlations", m.as_dict())
    return report


def levene_section(d, config) -> rp.Report:
    report = rp.Report()
    table, data = rp.levene_table(d, config.variables or LEVENE_DEFAULT, config.scheme)
    report.add(table, "levene", data)
    return report


def anova_section(d, config) -> rp.Report:
    report = rp.Report()
    table, data = rp.anova_table(d, config.variables or LEVENE_DEFAULT, config.scheme)
    report.add(table, "anova", data)
    return report


def regress_section(d, config, responses=None):
    report, fits = rp.Report(), []
    results = {}
    for response in responses or ([config.response] if config.response else REGRESS_DEFAULT):
        candidates = [c for c in config.candidates if c != response]
        trace = rg.stepwise_forward(d, response, candidates, config.p_enter)
        results[response] = trace.as_dict()
        if trace.empty:
            report.add(rp.Table(f"Model Summary: {d.variable(response).label}", [], [],
                                [f"No candidate met the entry criterion (p <= {config.p_enter})."]))
            continue
        report.add(rp.model_summary_table(d, trace))
        report.add(rp.coefficients_table(d, trace))
        report.add(rp.residuals_table(d, trace.final))
        results[response]["residual_statistics"] = rg.residual_statistics(trace.final).as_dict()
        fits.append(trace.final)
    report.data["regression"] = results
    return report, fits


# -- commands ----------------------------------------------------------------

def cmd_clean(args, config, out) -> int:
    raw = load(config)
    try:
        data, report = clean(raw, config.ranges, config.outlier_rule)
    except DataError as exc:
        raise CliExit(EXIT_IO, str(exc)) from None
    target = args.output
    if target is None:
        stem = "bundled" if config.input == BUNDLED else Path(config.input).stem
        target = Path(config.output_dir or ".") / f"{stem}.clean.csv"
    rep = rp.Report()
    rep.add(rp.cleaning_table(report), "cleaning", report.as_dict())
    rep.tables[0].footnotes.append(f"Outlier rule: {config.outlier_rule}.")
    if not report.empty:
        try:
            Path(target).parent.mkdir(parents=True, exist_ok=True)
            write_csv(data, target)
        except OSError as exc:
            raise CliExit(EXIT_IO, f"cannot write {target}: {exc.strerror or exc}") from None
        rep.tables[0].footnotes.append(f"Cleaned data written to {target}.")
    _emit(rep, config, out)
    return EXIT_EMPTY if report.empty else EXIT_OK


def _simple(section):
    def command(args, config, out) -> int:
        d, _ = load_clean(config)
        report = _analysis(section, d, config)
        _emit(report, config, out)
        return EXIT_OK
    return command


def cmd_describe(args, config, out) -> int:
    d, _ = load_clean(config)
    report = _analysis(describe_section, d, config)
    _emit(report, config, out)
    if config.output_dir:
        from .figures import write_figures
        write_figures(d, Path(config.output_dir) / "figures",
                      config.variables or ALL_VARIABLES, bins=config.bin_rule)
    return EXIT_OK


def cmd_regress(args, config, out) -> int:
    d, _ = load_clean(config)
    report, fits = _analysis(regress_section, d, config)
    _emit(report, config, out)
    if args.save_model and fits:
        Path(args.save_model).write_text(
            rg.PublishedModel.from_fit(fits[-1], f"fitted_{fits[-1].response}").to_json() + "\n",
            encoding="utf-8")
    if config.output_dir and fits:
        from .figures import write_figures
        write_figures(d, Path(config.output_dir) / "figures", [], fits)
    return EXIT_OK


def cmd_predict(args, config, out) -> int:
    if args.model_file:
        try:
            text = Path(args.model_file).read_text(encoding="utf-8")
        except OSError as exc:
            raise CliExit(EXIT_IO, f"cannot read {args.model_file}: {exc.strerror or exc}") from None
        model = _analysis(rg.PublishedModel.from_json, text)
    elif args.model:
        model = _analysis(rg.get_published_model, args.model)
    else:
        raise CliExit(EXIT_ANALYSIS, "name a published model or pass --model-file")
    inputs = {}
    for flag, name in PREDICT_FLAGS.items():
        v = getattr(args, flag)
        if v is not None:
            inputs[name] = v
    for item in args.set or ():
        key, sep, val = item.partition("=")
        try:
            inputs[key.strip()] = float(val)
        except ValueError:
            raise CliExit(EXIT_ANALYSIS, f"bad --set value {item!r}") from None
        if not sep:
            raise CliExit(EXIT_ANALYSIS, f"bad --set value {item!r}")
    value = _analysis(rg.predict, model, inputs)
    if config.format == "json":
        report = rp.Report()
        report.add(rp.prediction_table(model, inputs, value), "prediction",
                   {"model": model.name, "inputs": inputs, "predicted": value})
        _emit(report, config, out)
    else:
        out.write(f"{value:.3f}\n")
    return EXIT_OK


def cmd_report(args, config, out) -> int:
    d, cleaning = load_clean(config)
    report = rp.Report()
    report.add(rp.cleaning_table(cleaning), "cleaning", cleaning.as_dict())

    def build():
        report.extend(describe_section(d, config))
        report.extend(levene_section(d, config))
        report.extend(anova_section(d, config))
        report.extend(correlate_section(d, config))
        regress, fits = regress_section(d, config)
        report.extend(regress)
        return fits

    fits = _analysis(build)
    _emit(report, config, out)
    if config.output_dir:
        from .figures import write_figures
        write_figures(d, Path(config.output_dir) / "figures",
                      config.variables or ALL_VARIABLES, fits, config.bin_rule)
    return EXIT_OK


def cmd_synth(args, config, out) -> int:
    from .synthetic import bundled_frame
    d = bundled_frame(args.rows, args.seed)
    try:
        write_csv(d, args.output)
    except OSError as exc:
        raise CliExit(EXIT_IO, f"cannot write {args.output}: {exc.strerror or exc}") from None
    out.write(f"wrote {d.row_count} rows to {args.output}\n")
    return EXIT_OK


# -- argument parsing --------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--input", "-i", help="CSV file to analyse (default: the bundled synthetic data)")
    g.add_argument("--config", help="key = value file mirroring these options")
    g.add_argument("--format", choices=("text", "json"))
    g.add_argument("--outlier-rule", dest="outlier_rule", metavar="{none,tukey:K}",
                   help="outlier removal after range checks (default tukey:1.5)")
    g.add_argument("--filter", metavar='"var>value"',
                   help="row subset for correlations, e.g. irradiance_wm2>0")
    g.add_argument("--groups", type=int, metavar="K", help="number of groups (default 25)")
    g.add_argument("--grouping", metavar="SCHEME",
                   help="rows (chronological blocks), bins::VAR (rank bins of VAR) or column:VAR")
    g.add_argument("--variables", help="comma-separated variables to analyse")
    g.add_argument("--response", help="regression response (default: pv_kw and load_kw)")
    g.add_argument("--candidates", help="comma-separated stepwise candidates")
    g.add_argument("--p-enter", dest="p_enter", type=float, metavar="X",
                   help="probability of F to enter (default 0.05)")
    g.add_argument("--bins", help="histogram bins: sturges, fd or a count")
    g.add_argument("--output-dir", dest="output_dir",
                   help="also write the report, per-table CSV files and figures here")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="greenstat",
        description="Statistical analysis of building weather, PV and load time series.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("clean", parents=[common], help="clean the input and write a CSV")
    p.add_argument("--output", "-o", help="cleaned CSV path")
    p.set_defaults(func=cmd_clean)

    for name, func, text in (
        ("describe", cmd_describe, "descriptive statistics, boxplot and histogram tables"),
        ("correlate", _simple(correlate_section), "Pearson correlation matrix"),
        ("levene", _simple(levene_section), "Levene's test, four centering variants"),
        ("anova", _simple(anova_section), "one-way ANOVA"),
        ("report", cmd_report, "every section, in order"),
    ):
        sub.add_parser(name, parents=[common], help=text).set_defaults(func=func)

    p = sub.add_parser("regress", parents=[common], help="forward stepwise regression")
    p.add_argument("--save-model", dest="save_model", help="write the final model as JSON")
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("predict", parents=[common], help="evaluate a prediction equation")
    p.add_argument("model", nargs="?", help="published model name (pv_model_4, load_model_2)")
    p.add_argument("--model-file", dest="model_file", help="model JSON written by regress")
    for flag in PREDICT_FLAGS:
        p.add_argument(f"--{flag.replace('_', '-')}", dest=flag, type=float)
    p.add_argument("--set", action="append", metavar="NAME=VALUE",
                   help="input for any predictor by column name")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("synth", parents=[common], help="write a synthetic dataset")
    p.add_argument("--rows", type=int, default=6830)
    p.add_argument("--seed", type=int, default=6830)
    p.add_argument("--output", "-o", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        config = build_config(args)
        return args.func(args, config, out)
    except CliExit as exc:
        if exc.message:
            print(f"greenstat: {exc.message}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
