import json

import pytest

from fitch_mi.session import (
    AWAITING_USER,
    DONE,
    DONE_WITH_GAPS,
    FAILED,
    Session,
    SessionError,
)


@pytest.fixture()
def session(peano_module):
    return Session(peano_module, "sum-total-comm")


def test_unknown_theorem(peano_module):
    with pytest.raises(SessionError):
        Session(peano_module, "no-such-theorem")


def test_autonomous_theorem_finishes_immediately(peano_module):
    s = Session(peano_module, "sum-zero-rhs")
    assert s.phase == DONE
    out = s.outcome_json()
    assert out["type"] == "done"
    assert out["gaps"] is False


def test_suspends_awaiting_user(session):
    assert session.phase == AWAITING_USER
    prompt = session.prompt_json()
    assert prompt["theorem"] == "sum-total-comm"
    labels = [h["label"] for h in prompt["hypotheses"]]
    assert labels == ["ind-hyp₂", "ind-hyp₁"]
    assert "Sum(S(m₁), S(m₂), n₃)" in prompt["goal"]


def test_commands_do_not_change_state(session):
    before = session.prompt_json()
    assert session.submit_command("context")["type"] == "prompt"
    assert session.submit_command("trace")["type"] == "prompt"
    assert session.prompt_json() == before
    with pytest.raises(SessionError):
        session.submit_command("frobnicate")


def test_fragment_completes_session(session, fragment_text):
    out = session.submit_fragment(fragment_text)
    assert out["type"] == "done"
    assert session.phase == DONE
    assert "by induction" in out["elaborated_gapped"]


def test_bad_fragment_reports_error_and_stays_suspended(session, fragment_text):
    broken = "\n".join(
        line for line in fragment_text.splitlines() if not line.lstrip().startswith("| 7:")
    )
    out = session.submit_fragment(broken)
    assert out["type"] == "error"
    assert out["where"] == "fragment"
    assert out["line"]
    assert session.phase == AWAITING_USER
    # the rejected fragment is not replayed
    assert session.answers == []
    out = session.submit_fragment(fragment_text)
    assert out["type"] == "done"


def test_skip_leaves_gaps(session):
    out = session.submit_command("skip")
    assert session.phase == DONE_WITH_GAPS
    assert out["gaps"] is True
    gapped = session.elaborate("gapped")
    assert "prove" in gapped


def test_abort_fails_session(session):
    out = session.submit_command("abort")
    assert session.phase == FAILED
    assert out["type"] == "failed"
    with pytest.raises(SessionError):
        session.elaborate()


def test_submitting_after_done_is_an_error(session, fragment_text):
    session.submit_fragment(fragment_text)
    with pytest.raises(SessionError):
        session.submit_fragment(fragment_text)
    with pytest.raises(SessionError):
        session.submit_command("skip")


def test_transcript_replay(tmp_path, peano_module, session, fragment_text):
    session.submit_command("trace")
    session.submit_fragment(fragment_text)
    path = tmp_path / "transcript.jsonl"
    session.save_transcript(str(path))
    events = [json.loads(line) for line in path.read_text().splitlines()]
    assert [e["event"] for e in events] == [
        "start", "prompt", "command", "fragment", "done",
    ]
    assert all("time" in e for e in events)
    replayed = Session.replay(peano_module, "sum-total-comm", str(path))
    assert replayed.phase == session.phase
    assert replayed.elaborate("gapped") == session.elaborate("gapped")
    assert replayed.elaborate("full") == session.elaborate("full")
