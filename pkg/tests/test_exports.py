import pytest

from adaptmine import Session, parse_kb_text, write_transactions
from adaptmine.exports import MissingArtifactError, fcis_text, rules_text, transactions_text
from adaptmine.session import STEPS


@pytest.fixture
def ran_session(letters_kb):
    session = Session(letters_kb)
    session.set_params({"sigma": 0.5})
    for step in STEPS:
        session.run_step(step)
    return session


def test_transactions_export_matches_streamed_writer(ran_session, letters_kb):
    from_db = transactions_text(ran_session)
    streamed = write_transactions(ran_session.artifacts["s4"], kb_digest=letters_kb.digest)
    assert from_db == streamed


def test_transactions_export_respects_pair_filter(letters_kb):
    session = Session(letters_kb)
    session.set_params({"sigma": 0.5, "filters": {"transaction": {"min_overlap": 3}}})
    for step in ("s1", "s2", "s3", "s4", "s5", "s6"):
        session.run_step(step)
    assert session.artifacts["s6"].n_transactions == 0
    text = transactions_text(session)
    lines = [l for l in text.splitlines() if l and not l.startswith("#")]
    assert lines == []  # the two problems only share two properties


def test_fcis_export_carries_digest_header(ran_session, letters_kb):
    text = fcis_text(ran_session)
    assert f"# kb-digest: {letters_kb.digest}" in text
    assert "# sigma: 0.5" in text


def test_rules_export_contains_candidates(ran_session, letters_kb):
    text = rules_text(ran_session)
    assert letters_kb.digest in text


def test_missing_artifacts_are_reported(letters_kb):
    session = Session(letters_kb)
    with pytest.raises(MissingArtifactError):
        fcis_text(session)
    with pytest.raises(MissingArtifactError):
        transactions_text(session)
