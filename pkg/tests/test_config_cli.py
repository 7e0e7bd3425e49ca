import json
import math

import pytest
from click.testing import CliRunner

from shuffleleak.cli import main
from shuffleleak.config import (
    ExperimentConfig,
    parse_config,
    validate_config,
)
from shuffleleak.runner import preset_configs, run_configs, to_csv
from shuffleleak import Categorical, make_krr, make_uniform, make_zipf


def make_doc(**overrides):
    doc = {
        "mode": "shuffle_only",
        "quantity": "IY1",
        "P": {"type": "zipf", "m": 4, "alpha": 0.7},
        "Q": {"type": "uniform", "m": 4},
        "n_grid": [4, 8],
        "samples": 2000,
        "seed": 7,
        "method": "mc+asym",
    }
    doc.update(overrides)
    return doc


class TestParsing:
    def test_valid_doc_round_trips(self):
        cfg, diags = parse_config(make_doc())
        assert diags == []
        assert cfg.p.same_mass(make_zipf(4, 0.7))
        assert cfg.q.same_mass(make_uniform(4))
        assert cfg.n_grid == (4, 8)

    def test_explicit_distribution_literal(self):
        cfg, diags = parse_config(
            make_doc(P={"type": "explicit", "labels": ["a", "b"], "probs": [0.3, 0.7]},
                     Q={"type": "explicit", "labels": ["a", "b"], "probs": [0.5, 0.5]})
        )
        assert diags == []
        assert cfg.p.prob("a") == pytest.approx(0.3)

    def test_krr_mechanism_literal(self):
        cfg, diags = parse_config(
            {
                "mode": "shuffle_dp",
                "quantity": "IX1",
                "mechanism": {"type": "krr", "k": 4, "eps0": 1.0},
                "n_grid": [8],
                "samples": 1000,
            }
        )
        assert diags == []
        assert cfg.mechanism.kernel[0, 0] == pytest.approx(math.e / (math.e + 3))

    def test_explicit_kernel_literal(self):
        cfg, diags = parse_config(
            {
                "mode": "shuffle_dp",
                "quantity": "IX1",
                "mechanism": {"type": "explicit", "kernel": [[0.7, 0.3], [0.3, 0.7]]},
                "n_grid": [4],
            }
        )
        assert diags == []
        assert cfg.mechanism.input_labels == (1, 2)

    def test_unknown_distribution_type(self):
        _, diags = parse_config(make_doc(P={"type": "gaussian"}))
        assert any(d.field == "P" for d in diags)


class TestValidation:
    def test_missing_mechanism_in_dp(self):
        _, diags = parse_config(
            {"mode": "shuffle_dp", "quantity": "IX1", "n_grid": [8]}
        )
        assert [d.field for d in diags] == ["mechanism"]

    def test_negative_samples(self):
        _, diags = parse_config(make_doc(samples=-5))
        assert [d.field for d in diags] == ["samples"]

    def test_exact_resource_limit_diagnostic(self):
        _, diags = parse_config(
            make_doc(method="exact", n_grid=[1_000_000])
        )
        assert any("resource-limit" in d.message for d in diags)

    def test_matched_closed_form_has_no_limit(self):
        doc = make_doc(method="exact", n_grid=[1_000_000])
        del doc["Q"]
        _, diags = parse_config(doc)
        assert diags == []

    def test_empty_n_grid(self):
        _, diags = parse_config(make_doc(n_grid=[]))
        assert any(d.field == "n_grid" for d in diags)

    def test_ix1_needs_dp_mode(self):
        _, diags = parse_config(make_doc(quantity="IX1"))
        assert any(d.field == "quantity" for d in diags)

    def test_x_inputs_length_must_match_grid(self):
        cfg = ExperimentConfig(
            mode="shuffle_dp", quantity="IK", mechanism=make_krr(2, 1.0),
            x_inputs=(1, 2, 1), n_grid=(4,), method="exact",
        )
        assert any(d.field == "x_inputs" for d in validate_config(cfg))


class TestRunner:
    def test_rows_in_plan_order(self):
        cfg, _ = parse_config(make_doc(samples=500))
        rows = run_configs([cfg])
        assert [(r.n, r.method) for r in rows] == [
            (4, "mc"), (4, "asym"), (8, "mc"), (8, "asym"),
        ]

    def test_csv_shape(self):
        cfg, _ = parse_config(make_doc(samples=500))
        text = to_csv(run_configs([cfg]))
        lines = text.strip().split("\n")
        assert lines[0] == "case,n,method,quantity,value_nats,stderr"
        assert all(line.count(",") == 5 for line in lines)
        # exact/asym rows leave stderr empty
        assert lines[2].endswith(",")

    def test_worker_count_does_not_change_bytes(self):
        cfg, _ = parse_config(make_doc(samples=4000, method="mc"))
        a = to_csv(run_configs([cfg], workers=1))
        b = to_csv(run_configs([cfg], workers=4))
        assert a == b

    def test_all_skips_infeasible_exact(self):
        cfg, diags = parse_config(
            make_doc(method="all", n_grid=[4, 1_000_000], samples=100)
        )
        assert diags == []
        rows = run_configs([cfg])
        exact_ns = [r.n for r in rows if r.method == "exact"]
        assert exact_ns == [4]

    def test_dp_ik_rows(self):
        cfg = ExperimentConfig(
            mode="shuffle_dp", quantity="IK", mechanism=make_krr(2, 0.8),
            n_grid=(3,), method="exact+bounds",
        )
        rows = run_configs([cfg])
        by_method = {r.method: r.value for r in rows}
        assert by_method["exact"] <= by_method["bound_position"] + 1e-9

    def test_dp_iy1_clone_bound_row(self):
        cfg = ExperimentConfig(
            mode="shuffle_dp", quantity="IY1", mechanism=make_krr(4, 1.0),
            n_grid=(64,), method="bounds",
        )
        rows = run_configs([cfg])
        assert rows[0].method == "bound_clone"
        assert rows[0].value == pytest.approx(3 * math.e / 128)


class TestPresets:
    def test_fig1_has_both_cases_and_methods(self):
        rows = run_configs(preset_configs("fig1"))
        cases = {r.case for r in rows}
        assert cases == {"uniform_m4", "zipf_m4_a07"}
        assert {r.method for r in rows} == {"exact", "asym"}

    def test_fig2_covers_constants(self):
        cfgs = preset_configs("fig2", samples=200)
        cases = {c.label for c in cfgs}
        assert cases == {"q_uniform_ik", "q_uniform_iy1", "q_matched_iy1", "q_optimal_iy1"}

    def test_fig3_methods(self):
        rows = run_configs(preset_configs("fig3", samples=500))
        methods = {r.method for r in rows}
        assert methods == {"mc", "asym", "bound_unified", "bound_blanket"}

    def test_table_rows_reachable(self):
        # every headline setting maps to a runnable config
        settings = {
            "matched": ExperimentConfig(quantity="IK", p=make_uniform(3),
                                        n_grid=(4,), method="exact"),
            "visible": ExperimentConfig(quantity="IY1", p=make_zipf(4, 0.7),
                                        q=make_uniform(4), n_grid=(4,), method="asym"),
            "hidden": ExperimentConfig(
                quantity="IK", p=make_zipf(3, 0.2),
                q=Categorical((1, 2, 3), (0.5, 0.5, 0.0)),
                n_grid=(4,), method="asym"),
            "heterogeneous": ExperimentConfig(
                mode="shuffle_dp", quantity="IK", mechanism=make_krr(3, 0.5),
                n_grid=(3,), method="bounds"),
            "dp_input": ExperimentConfig(
                mode="shuffle_dp", quantity="IX1", mechanism=make_krr(3, 0.5),
                n_grid=(8,), method="bounds"),
        }
        for name, cfg in settings.items():
            assert validate_config(cfg) == [], name
            assert run_configs([cfg]), name


class TestCli:
    def test_validate_ok(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(make_doc()))
        result = CliRunner().invoke(main, ["validate", "--config", str(path)])
        assert result.exit_code == 0
        assert "ok" in result.output

    def test_validate_reports_diagnostics(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"mode": "shuffle_dp", "quantity": "IX1", "n_grid": [4]}))
        result = CliRunner().invoke(main, ["validate", "--config", str(path)])
        assert result.exit_code == 2
        assert "mechanism" in result.output

    def test_run_writes_csv(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        out_path = tmp_path / "out.csv"
        cfg_path.write_text(json.dumps(make_doc(samples=300)))
        result = CliRunner().invoke(
            main, ["run", "--config", str(cfg_path), "--out", str(out_path)]
        )
        assert result.exit_code == 0
        assert out_path.read_text().startswith("case,n,method")

    def test_run_bad_json_exits_2(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{nope")
        result = CliRunner().invoke(main, ["run", "--config", str(path)])
        assert result.exit_code == 2

    def test_run_resource_limit_exits_3(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(make_doc(method="exact", n_grid=[1_000_000])))
        result = CliRunner().invoke(main, ["run", "--config", str(path)])
        assert result.exit_code == 3

    def test_seed_override_changes_mc(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(make_doc(samples=500, method="mc")))
        r1 = CliRunner().invoke(main, ["run", "--config", str(cfg_path), "--seed", "1"])
        r2 = CliRunner().invoke(main, ["run", "--config", str(cfg_path), "--seed", "2"])
        assert r1.output != r2.output

    def test_preset_command(self, tmp_path):
        out = tmp_path / "fig1.csv"
        result = CliRunner().invoke(main, ["preset", "fig1", "--out", str(out)])
        assert result.exit_code == 0
        assert out.read_text().count("\n") == 49  # header + 48 rows
