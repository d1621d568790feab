import json

import pytest

from stagecraft.deconfab import Claim
from stagecraft.evidence import EvidenceBundle, SearchHit
from stagecraft.gateway import ScriptEntry, script_mock
from stagecraft.trials import TrialFixture, format_table, load_fixture, run_trials
from tests.conftest import (
    VITAL_RESPONSE,
    VITAL_SNIPPETS,
    not_supported_dialog,
    partially_supported_dialog,
    supported_dialog,
    undecided_dialog,
)


def vital_fixture() -> TrialFixture:
    snippets = [
        SearchHit(url=f"https://nasa.gov/{i}", site="nasa.gov", title="", snippet=s, rank=i + 1)
        for i, s in enumerate(VITAL_SNIPPETS)
    ]
    return TrialFixture(
        claim=Claim(id="t0.c0", assertion_id="t0", text=VITAL_RESPONSE),
        evidence=EvidenceBundle(claim_text=VITAL_RESPONSE, snippets=snippets),
        ground_truth="false",
    )


def outcome_mix_script():
    """Nine dismissals and one partial acceptance, the observed 10-trial mix."""
    dialogs = [not_supported_dialog(VITAL_RESPONSE) for _ in range(4)]
    dialogs.append(partially_supported_dialog(VITAL_RESPONSE))
    dialogs.extend(not_supported_dialog(VITAL_RESPONSE) for _ in range(5))
    return script_mock([ScriptEntry("*", d) for d in dialogs])


class TestRunTrials:
    def test_ten_trial_mix(self):
        table = run_trials(vital_fixture(), 10, outcome_mix_script())
        assert table.counts["Supported"] == 0
        assert table.counts["PartiallySupported"] == 1
        assert table.counts["NotSupported"] == 9
        assert table.counts["Indeterminate"] == 0
        assert table.detection_rate == pytest.approx(0.9)
        assert sum(table.counts.values()) == table.n == 10

    def test_single_trial_detection(self):
        mock = script_mock([ScriptEntry("*", not_supported_dialog(VITAL_RESPONSE))])
        table = run_trials(vital_fixture(), 1, mock)
        assert table.detection_rate == 1.0

    def test_gateway_errors_counted_as_indeterminate(self):
        mock = script_mock(
            [
                ScriptEntry("*", not_supported_dialog(VITAL_RESPONSE)),
                ScriptEntry("never-matches-anything-here", "x"),
            ]
        )
        table = run_trials(vital_fixture(), 4, mock)
        assert table.counts["NotSupported"] == 1
        assert table.counts["Indeterminate"] == 3
        assert table.gateway_errors == 3
        assert sum(table.counts.values()) == 4

    def test_true_claim_detection_rate(self):
        mock = script_mock([ScriptEntry("*", supported_dialog("x")) for _ in range(3)])
        fixture = vital_fixture()
        fixture.ground_truth = "true"
        table = run_trials(fixture, 3, mock)
        assert table.detection_rate == 1.0

    def test_unknown_ground_truth_rate_zero(self):
        mock = script_mock([ScriptEntry("*", undecided_dialog("x"))])
        fixture = vital_fixture()
        fixture.ground_truth = "unknown"
        assert run_trials(fixture, 1, mock).detection_rate == 0.0

    def test_empty_fixture_evidence_never_supported(self):
        mock = script_mock([ScriptEntry("*", supported_dialog("x")) for _ in range(2)])
        fixture = vital_fixture()
        fixture.evidence = EvidenceBundle(claim_text=VITAL_RESPONSE)
        table = run_trials(fixture, 2, mock)
        assert table.counts["Supported"] == 0
        assert table.counts["NotSupported"] == 2

    def test_dump_dialogs(self, tmp_path):
        mock = outcome_mix_script()
        run_trials(vital_fixture(), 10, mock, dump_dir=tmp_path / "dialogs")
        dumped = sorted((tmp_path / "dialogs").glob("trial_*.txt"))
        assert len(dumped) == 10

    def test_n_must_be_positive(self):
        with pytest.raises(ValueError):
            run_trials(vital_fixture(), 0, script_mock([]))


class TestFormatTable:
    def test_observed_mix_rendering(self):
        table = run_trials(vital_fixture(), 10, outcome_mix_script())
        text = format_table(table)
        assert "Result of 10 trials" in text
        lines = text.splitlines()
        by_label = {line.rsplit(None, 1)[0].strip(): line.rsplit(None, 1)[1] for line in lines[1:-1]}
        assert by_label["supported"] == "0"
        assert by_label["partially supported"] == "1"
        assert by_label["not supported"] == "9"
        assert sum(int(v) for v in by_label.values()) == 10
        assert "indeterminate" not in text
        assert text.rstrip().endswith("Truth: Claim is false")

    def test_indeterminate_row_when_nonzero(self):
        mock = script_mock([ScriptEntry("*", undecided_dialog("x"))])
        table = run_trials(vital_fixture(), 1, mock)
        assert "indeterminate" in format_table(table)

    def test_single_nonzero_row_present(self):
        mock = script_mock([ScriptEntry("*", not_supported_dialog("x")) for _ in range(4)])
        text = format_table(run_trials(vital_fixture(), 4, mock))
        row = [line for line in text.splitlines() if line.startswith("not supported")]
        assert row and row[0].split()[-1] == "4"


class TestFixtureFile:
    def test_load_fixture(self, tmp_path):
        payload = {
            "claim_text": VITAL_RESPONSE,
            "ground_truth": "false",
            "evidence": [
                {"url": "https://nasa.gov/1", "site": "nasa.gov", "snippet": VITAL_SNIPPETS[0], "rank": 1},
                {"snippet": VITAL_SNIPPETS[1]},
            ],
        }
        path = tmp_path / "fixture.json"
        path.write_text(json.dumps(payload), encoding="utf-8")
        fixture = load_fixture(path)
        assert fixture.claim.text == VITAL_RESPONSE
        assert len(fixture.evidence.snippets) == 2
        assert fixture.evidence.snippets[1].rank == 2
        assert fixture.ground_truth == "false"
