import io
import math
from datetime import datetime, timedelta

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from greenstat.errors import ParseError, SchemaError, ValidationError
from greenstat.timeseries import (
    DEFAULT_RANGES,
    DEFAULT_SCHEMA,
    Comparison,
    Dataset,
    OutlierRule,
    RangeSpec,
    Variable,
    clean,
    filter_rows,
    load_csv,
    parse_outlier_rule,
    parse_predicate,
    to_csv_bytes,
    validate_ranges,
)

HEADER = "timestamp,temperature_c,relative_humidity_pct,irradiance_wm2,dust_mgm3,wind_speed_kmh,pv_kw,load_kw"
T0 = datetime(2014, 11, 1)


def csv_bytes(*rows, header=HEADER):
    return ("\n".join([header, *rows]) + "\n").encode("utf-8")


def row(i, t=30.0, rh=40.0, irr=500.0, dust=0.5, wind=5.0, pv=10.0, load=8.0):
    vals = [t, rh, irr, dust, wind, pv, load]
    cells = ["" if v is None else str(v) for v in vals]
    return ",".join([(T0 + timedelta(hours=i)).isoformat()] + cells)


def make(columns, n=None):
    n = n if n is not None else len(next(iter(columns.values())))
    full = {v.name: columns.get(v.name, np.full(n, 1.0)) for v in DEFAULT_SCHEMA}
    return Dataset(tuple(T0 + timedelta(hours=i) for i in range(n)), DEFAULT_SCHEMA, full)


class TestVariable:
    def test_bad_unit(self):
        with pytest.raises(SchemaError):
            Variable("x", "furlongs", "weather")

    def test_bad_role(self):
        with pytest.raises(SchemaError):
            Variable("x", "kW", "storage")

    def test_label_defaults_to_name(self):
        assert Variable("x", "kW", "load").label == "x"


class TestLoadCsv:
    def test_three_rows(self):
        d = load_csv(csv_bytes(row(0), row(1), row(2)))
        assert d.row_count == 3
        assert d.names == [v.name for v in DEFAULT_SCHEMA]

    def test_empty_cell_is_missing(self):
        d = load_csv(csv_bytes(row(0), row(1, irr=None), row(2)))
        assert np.isnan(d.column("irradiance_wm2")).sum() == 1
        assert d.missing_mask().tolist() == [False, True, False]

    def test_non_numeric_token_is_missing(self):
        d = load_csv(csv_bytes(row(0, t="n/a")))
        assert math.isnan(d.column("temperature_c")[0])

    def test_missing_header_column(self):
        header = HEADER.replace(",pv_kw", "")
        with pytest.raises(SchemaError, match="pv_kw"):
            load_csv(csv_bytes(header=header))

    def test_unknown_header_column(self):
        with pytest.raises(SchemaError, match="snow"):
            load_csv(csv_bytes(header=HEADER + ",snow"))

    def test_wrong_field_count_reports_line(self):
        with pytest.raises(ParseError) as err:
            load_csv(csv_bytes(row(0), row(1) + ",99"))
        assert err.value.line == 3

    def test_bad_timestamp(self):
        with pytest.raises(ParseError):
            load_csv(csv_bytes("yesterday,1,2,3,4,5,6,7"))

    def test_duplicate_timestamp(self):
        with pytest.raises(ValidationError):
            load_csv(csv_bytes(row(0), row(0)))

    def test_rows_sorted_by_timestamp(self):
        d = load_csv(csv_bytes(row(2, t=3.0), row(0, t=1.0), row(1, t=2.0)))
        assert d.column("temperature_c").tolist() == [1.0, 2.0, 3.0]

    def test_columns_in_any_order(self):
        names = HEADER.split(",")
        header = ",".join([names[0]] + names[1:][::-1])
        d = load_csv(csv_bytes("2014-11-01T00:00:00,7,6,5,4,3,2,1", header=header))
        assert d.column("temperature_c")[0] == 1.0
        assert d.column("load_kw")[0] == 7.0

    def test_round_trip(self):
        d = load_csv(csv_bytes(row(0, t=29.123456789012), row(1, irr=None), row(2)))
        assert load_csv(to_csv_bytes(d)) == d

    def test_stream_input(self):
        assert load_csv(io.BytesIO(csv_bytes(row(0)))).row_count == 1


class TestDataset:
    def test_columns_are_read_only(self):
        d = make({"pv_kw": np.arange(3.0)})
        with pytest.raises(ValueError):
            d.column("pv_kw")[0] = 5.0

    def test_timestamps_must_increase(self):
        with pytest.raises(ValidationError):
            Dataset((T0, T0), DEFAULT_SCHEMA, {v.name: [1.0, 2.0] for v in DEFAULT_SCHEMA})

    def test_length_mismatch(self):
        cols = {v.name: [1.0, 2.0] for v in DEFAULT_SCHEMA}
        cols["pv_kw"] = [1.0]
        with pytest.raises(ValidationError):
            Dataset((T0, T0 + timedelta(hours=1)), DEFAULT_SCHEMA, cols)

    def test_unknown_column(self):
        with pytest.raises(ValidationError):
            make({"pv_kw": np.ones(2)}).column("snow")


class TestValidateRanges:
    def test_observed_humidity_maximum_is_valid(self):
        assert validate_ranges(make({"relative_humidity_pct": np.array([92.43])})) == []

    def test_cold_temperature_flagged(self):
        out = validate_ranges(make({"temperature_c": np.array([25.0, -20.0])}))
        assert out == [(1, "temperature_c", -20.0)]

    def test_bounds_are_closed(self):
        assert validate_ranges(make({"pv_kw": np.array([0.0, 40.0])})) == []

    def test_empty_dataset(self):
        assert validate_ranges(make({}, n=0)) == []

    def test_spec_must_cover_variables(self):
        with pytest.raises(ValidationError):
            validate_ranges(make({"pv_kw": np.ones(1)}), RangeSpec({"pv_kw": (0, 1)}))

    def test_inverted_range_rejected(self):
        with pytest.raises(ValidationError):
            RangeSpec({"pv_kw": (5.0, 1.0)})


class TestClean:
    def test_clean_data_is_untouched(self):
        d = make({"pv_kw": np.linspace(1, 10, 10)})
        out, rep = clean(d, DEFAULT_RANGES, OutlierRule(None))
        assert out == d
        assert (rep.rows_in, rep.rows_out) == (10, 10)
        assert rep.dropped_missing == rep.dropped_out_of_range == rep.dropped_outlier == 0

    def test_missing_row_dropped(self):
        d = make({"pv_kw": np.array([1.0, 2.0, np.nan, 4.0, 5.0])})
        out, rep = clean(d, DEFAULT_RANGES, OutlierRule(None))
        assert out.row_count == 4
        assert rep.dropped_missing == 1
        assert rep.per_variable["pv_kw"]["missing"] == 1

    def test_out_of_range_row_dropped(self):
        d = make({"temperature_c": np.array([20.0, -40.0, 30.0])})
        out, rep = clean(d, DEFAULT_RANGES, OutlierRule(None))
        assert rep.dropped_out_of_range == 1
        assert out.column("temperature_c").tolist() == [20.0, 30.0]

    def test_tukey_with_weighted_average_quartiles(self):
        # Q1 = 1.5, Q3 = 52 under the (n+1)p rule: upper fence 127.75 keeps 100
        d = make({"irradiance_wm2": np.array([1.0, 2.0, 3.0, 4.0, 100.0])})
        out, rep = clean(d, DEFAULT_RANGES, OutlierRule(1.5))
        assert rep.dropped_out_of_range == rep.dropped_outlier == 0
        assert out.row_count == 5

    def test_tukey_drops_far_point(self):
        vals = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 39.0])
        out, rep = clean(make({"pv_kw": vals}), DEFAULT_RANGES, OutlierRule(1.5))
        assert rep.dropped_outlier == 1
        assert 39.0 not in out.column("pv_kw")

    def test_counts_add_up(self, rng):
        n = 300
        cols = {"pv_kw": rng.gamma(2.0, 3.0, n), "temperature_c": rng.normal(30, 8, n)}
        cols["pv_kw"][::37] = np.nan
        cols["temperature_c"][5] = 99.0
        out, rep = clean(make(cols))
        assert rep.rows_out == rep.rows_in - rep.dropped_missing - rep.dropped_out_of_range - rep.dropped_outlier
        assert rep.rows_out == out.row_count
        assert not out.missing_mask().any()

    def test_rule_none_is_idempotent(self, rng):
        d = make({"pv_kw": rng.uniform(-5, 45, 200)})
        once, _ = clean(d, DEFAULT_RANGES, OutlierRule(None))
        twice, rep = clean(once, DEFAULT_RANGES, OutlierRule(None))
        assert twice == once
        assert rep.rows_out == rep.rows_in

    def test_second_pass_drops_only_outliers(self, rng):
        d = make({"pv_kw": rng.gamma(1.0, 5.0, 400)})
        once, _ = clean(d)
        _, rep = clean(once)
        assert rep.dropped_missing == rep.dropped_out_of_range == 0

    def test_everything_dropped(self):
        out, rep = clean(make({"pv_kw": np.array([-1.0, -2.0])}))
        assert rep.empty and out.row_count == 0

    @pytest.mark.parametrize("text, k", [("none", None), ("tukey", 1.5), ("tukey:3", 3.0),
                                         ("TUKEY(2.2)", 2.2)])
    def test_parse_outlier_rule(self, text, k):
        assert parse_outlier_rule(text).k == k

    @pytest.mark.parametrize("text", ["zscore", "tukey:-1", "tukey:x"])
    def test_bad_outlier_rule(self, text):
        with pytest.raises(ValidationError):
            parse_outlier_rule(text)


class TestFilter:
    def test_positive_irradiance(self):
        d = make({"irradiance_wm2": np.array([0.0, 10.0, 0.0, 250.0])})
        assert filter_rows(d, "irradiance_wm2>0").row_count == 2

    def test_always_true(self):
        d = make({"pv_kw": np.array([1.0, 2.0])})
        assert filter_rows(d, "pv_kw>-1e9") == d

    def test_unknown_variable(self):
        with pytest.raises(ValidationError):
            filter_rows(make({"pv_kw": np.ones(2)}), "snow>0")

    def test_missing_never_matches(self):
        d = make({"pv_kw": np.array([np.nan, 2.0])})
        assert filter_rows(d, "pv_kw!=0").row_count == 1

    def test_conjunction(self):
        d = make({"pv_kw": np.arange(10.0)})
        assert filter_rows(d, "pv_kw>=2, pv_kw<5").column("pv_kw").tolist() == [2.0, 3.0, 4.0]

    def test_parse(self):
        assert parse_predicate("irradiance_wm2 > 0") == [Comparison("irradiance_wm2", ">", 0.0)]
        with pytest.raises(ValidationError):
            parse_predicate("irradiance_wm2 ~ 0")

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-100, 100), min_size=1, max_size=30), st.floats(-100, 100))
    def test_partition_property(self, values, cut):
        d = make({"pv_kw": np.array(values)})
        above = filter_rows(d, f"pv_kw>{cut!r}").row_count
        below = filter_rows(d, f"pv_kw<={cut!r}").row_count
        assert above + below == d.row_count
