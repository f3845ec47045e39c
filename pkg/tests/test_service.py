"""Annotation-service tests: plans, sessions, persistence, HTTP API."""

from __future__ import annotations

import itertools
import json
import threading

import numpy as np
import pytest
from fastapi.testclient import TestClient

from wiremetrics.ranking import ChoiceRecord
from wiremetrics.service import (
    BREAK_INTERVAL,
    ComparisonPlan,
    RecordStore,
    Session,
    WireframeStore,
    build_plan,
    create_app,
    parse_sanity_id,
    rater_reliability,
    sanity_method_id,
)
from wiremetrics.synthetic import generate_corpus


def small_plan(n_methods=4, n_houses=2, raters=("r0",), seed=0, sanity_rate=0.02):
    methods = [f"method-{chr(97 + i)}" for i in range(n_methods)]
    houses = [f"house-{i}" for i in range(n_houses)]
    return build_plan(houses, methods, list(raters), seed=seed, sanity_rate=sanity_rate)


def drive_session(session, n_answers, choose=lambda pres: "left"):
    """Answer n pairs (or until plan exhaustion); returns the presentations."""
    served = []
    for _ in range(n_answers):
        pres = session.next_pair()
        if pres is None:
            break
        session.record_choice(pres.token, choose(pres))
        served.append(pres)
    return served


# ---------------------------------------------------------------------------
# plan
# ---------------------------------------------------------------------------


def test_plan_has_exhaustive_base_coverage():
    plan = small_plan(n_methods=4, n_houses=3, sanity_rate=0.0)
    entries = plan.entries["r0"]
    assert len(entries) == 6 * 3 == plan.base_pair_count
    seen = {(e.house, e.first, e.second) for e in entries}
    expected = {
        (h, a, b)
        for h in plan.houses
        for a, b in itertools.combinations(sorted(plan.methods), 2)
    }
    assert seen == expected


def test_plan_counts_match_study_shape():
    methods = [f"m{i:02d}" for i in range(27)]
    houses = [f"h{i}" for i in range(10)]
    plan = build_plan(houses, methods, ["r0"], seed=1)
    base = 27 * 26 // 2 * 10
    assert base == 3510
    entries = plan.entries["r0"]
    sanity = [e for e in entries if e.is_sanity]
    assert len(entries) == base + len(sanity)
    assert len(sanity) == round(0.02 * base)


def test_plan_minimal_and_validation():
    plan = build_plan(["h"], ["a", "b"], ["r"], seed=0, sanity_rate=0.0)
    assert plan.size("r") == 1
    with pytest.raises(ValueError):
        build_plan(["h"], ["a", "a"], ["r"], seed=0)
    with pytest.raises(ValueError):
        build_plan(["h"], ["a"], ["r"], seed=0)
    with pytest.raises(ValueError):
        build_plan([], ["a", "b"], ["r"], seed=0)
    with pytest.raises(ValueError):
        build_plan(["h"], ["a", "sanity:x"], ["r"], seed=0)


def test_plan_deterministic_and_rater_specific():
    a = small_plan(seed=5, raters=("r0", "r1"))
    b = small_plan(seed=5, raters=("r0", "r1"))
    assert a.entries == b.entries
    assert a.entries["r0"] != a.entries["r1"]


def test_plan_randomizes_sides():
    plan = small_plan(n_methods=8, n_houses=4, sanity_rate=0.0)
    flips = [e.flip for e in plan.entries["r0"]]
    assert any(flips) and not all(flips)


def test_sanity_id_roundtrip():
    mid = sanity_method_id("deform", "low", 123)
    assert parse_sanity_id(mid) == ("deform", "low", 123)
    assert parse_sanity_id("method-a") is None


# ---------------------------------------------------------------------------
# session flow
# ---------------------------------------------------------------------------


def test_first_serve_is_plan_head_and_no_repeat(tmp_path):
    plan = small_plan(sanity_rate=0.0)
    session = Session("r0", plan, RecordStore(tmp_path / "s.jsonl"))
    pres = session.next_pair()
    entry = plan.entries["r0"][0]
    assert not pres.is_repeat
    assert {pres.left_id, pres.right_id} == {entry.first, entry.second}


def test_repeat_fraction_over_long_session(tmp_path):
    # 27 methods x 6 houses = 2106 base pairs, enough for 2000 answers
    methods = [f"m{i:02d}" for i in range(27)]
    houses = [f"h{i}" for i in range(6)]
    plan = build_plan(houses, methods, ["r0"], seed=3)
    session = Session("r0", plan, RecordStore(tmp_path / "s.jsonl"))
    served = drive_session(session, 2000)
    repeat_rate = sum(p.is_repeat for p in served) / len(served)
    assert len(served) == 2000
    assert 0.04 <= repeat_rate <= 0.06


def test_break_advisory_every_350_serves(tmp_path):
    methods = [f"m{i:02d}" for i in range(27)]
    plan = build_plan(["h0", "h1", "h2"], methods, ["r0"], seed=4)
    session = Session("r0", plan, RecordStore(tmp_path / "s.jsonl"))
    served = drive_session(session, 800)
    marks = [i + 1 for i, p in enumerate(served) if p.break_advisory]
    assert marks == [BREAK_INTERVAL, 2 * BREAK_INTERVAL]


def test_token_is_single_use(tmp_path):
    plan = small_plan(sanity_rate=0.0)
    store = RecordStore(tmp_path / "s.jsonl")
    session = Session("r0", plan, store)
    pres = session.next_pair()
    session.record_choice(pres.token, "left")
    with pytest.raises(ValueError):
        session.record_choice(pres.token, "left")
    assert len(store.load()) == 1


def test_new_serve_invalidates_stale_token(tmp_path):
    plan = small_plan(sanity_rate=0.0)
    store = RecordStore(tmp_path / "s.jsonl")
    session = Session("r0", plan, store)
    stale = session.next_pair()
    fresh = session.next_pair()
    with pytest.raises(ValueError):
        session.record_choice(stale.token, "left")
    session.record_choice(fresh.token, "right")
    assert len(store.load()) == 1


def test_unanswered_serve_is_reissued_identically(tmp_path):
    plan = small_plan(sanity_rate=0.0)
    session = Session("r0", plan, RecordStore(tmp_path / "s.jsonl"))
    a = session.next_pair()
    b = session.next_pair()  # same logical serve, new token
    assert (a.left_id, a.right_id, a.house) == (b.left_id, b.right_id, b.house)
    assert a.token != b.token


def test_plan_exhaustion_and_coverage(tmp_path):
    plan = small_plan(n_methods=3, n_houses=2, sanity_rate=0.0)
    store = RecordStore(tmp_path / "s.jsonl")
    session = Session("r0", plan, store)
    drive_session(session, 200)
    assert session.done
    assert session.next_pair() is None
    base_answers = [r for r in store.load() if not r.is_consistency_repeat]
    assert sorted((r.house, r.left, r.right) for r in base_answers) == sorted(
        (e.house, e.first, e.second) for e in plan.entries["r0"]
    )


def test_records_are_canonical_regardless_of_presentation(tmp_path):
    plan = small_plan(n_methods=4, n_houses=3, sanity_rate=0.0)
    store = RecordStore(tmp_path / "s.jsonl")
    session = Session("r0", plan, store)
    # always pick the alphabetically-first method, wherever it is shown
    def choose(pres):
        return "left" if pres.left_id < pres.right_id else "right"

    drive_session(session, 400)
    for record in store.load():
        assert record.left < record.right
    wins = [r.choice for r in store.load()]
    assert wins  # canonical orientation means the smaller id is always 'left'


def test_session_replay_reconstructs_state(tmp_path):
    plan = small_plan(n_methods=6, n_houses=3, seed=9, sanity_rate=0.02)
    store = RecordStore(tmp_path / "s.jsonl")
    live = Session("r0", plan, store)
    drive_session(live, 37)
    replayed = Session("r0", plan, store)
    assert replayed.cursor == live.cursor
    assert replayed.answered == live.answered
    assert replayed._pool == live._pool
    # both must agree on what comes next
    a = live.next_pair()
    b = replayed.next_pair()
    assert (a.house, a.left_id, a.right_id, a.is_repeat) == (
        b.house,
        b.left_id,
        b.right_id,
        b.is_repeat,
    )


def test_session_replay_rejects_mismatched_plan(tmp_path):
    plan = small_plan(seed=1, sanity_rate=0.0)
    store = RecordStore(tmp_path / "s.jsonl")
    drive_session(Session("r0", plan, store), 3)
    other = small_plan(seed=2, sanity_rate=0.0)
    with pytest.raises(ValueError):
        Session("r0", other, store)


def test_store_appends_survive_concurrent_writers(tmp_path):
    store = RecordStore(tmp_path / "s.jsonl")

    def write(k):
        for i in range(25):
            store.append(ChoiceRecord(f"r{k}", "h", "a", "b", "left", timestamp=float(i)))

    threads = [threading.Thread(target=write, args=(k,)) for k in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    records = store.load()
    assert len(records) == 100
    # every line parsed back cleanly and counts per rater are intact
    assert sorted({r.rater for r in records}) == ["r0", "r1", "r2", "r3"]


# ---------------------------------------------------------------------------
# reliability
# ---------------------------------------------------------------------------


def rec(rater, house, left, right, choice, repeat=False):
    return ChoiceRecord(rater, house, left, right, choice, is_consistency_repeat=repeat)


def test_reliability_consistency_counts_flipped_same_winner():
    records = [
        rec("r", "h", "a", "b", "left"),
        rec("r", "h", "a", "b", "left", repeat=True),
    ]
    rel = rater_reliability(records)["r"]
    assert rel.n_repeats == 1
    assert rel.consistency == 1.0


def test_reliability_inconsistent_repeat():
    records = [
        rec("r", "h", "a", "b", "left"),
        rec("r", "h", "a", "b", "right", repeat=True),
    ]
    assert rater_reliability(records)["r"].consistency == 0.0


def test_reliability_none_without_repeats_or_sanity():
    rel = rater_reliability([rec("r", "h", "a", "b", "left")])["r"]
    assert rel.consistency is None
    assert rel.sanity_accuracy is None


def test_reliability_sanity_accuracy():
    low = sanity_method_id("remove", "low", 7)
    high = sanity_method_id("remove", "high", 7)
    first, second = sorted((low, high))
    pick_low = "left" if first == low else "right"
    pick_high = "right" if first == low else "left"
    records = [
        rec("r", "h1", first, second, pick_low),
        rec("r", "h2", first, second, pick_high),
        rec("r", "h3", first, second, "equal"),
        rec("r", "h4", "a", "b", "left"),  # non-sanity, ignored
    ]
    rel = rater_reliability(records)["r"]
    assert rel.n_sanity == 3
    assert rel.sanity_accuracy == pytest.approx(1.0 / 3.0)


def test_random_rater_sanity_accuracy_near_half(tmp_path):
    plan = small_plan(n_methods=10, n_houses=4, seed=21, sanity_rate=0.5)
    store = RecordStore(tmp_path / "s.jsonl")
    session = Session("r0", plan, store, repeat_rate=0.0)
    rng = np.random.default_rng(0)
    drive_session(session, 10_000, choose=lambda p: ("left", "right")[rng.integers(2)])
    rel = rater_reliability(store.load())["r0"]
    assert rel.n_sanity >= 60
    assert 0.3 <= rel.sanity_accuracy <= 0.7


# ---------------------------------------------------------------------------
# HTTP API
# ---------------------------------------------------------------------------


@pytest.fixture()
def client(tmp_path):
    corpus = generate_corpus(2, seed=33)
    houses = ["house-0", "house-1"]
    methods = ["method-alpha", "method-beta", "method-gamma"]
    gt = dict(zip(houses, corpus))
    candidates = {}
    rng = np.random.default_rng(1)
    for h, wf in gt.items():
        for m in methods:
            jitter = rng.normal(scale=0.02, size=wf.vertices.shape)
            candidates[(h, m)] = type(wf)(wf.vertices + jitter, wf.edges)
    plan = build_plan(houses, methods, ["rater-1"], seed=11, sanity_rate=0.1)
    store = RecordStore(tmp_path / "records.jsonl")
    app = create_app(plan, store, WireframeStore(gt, candidates))
    return TestClient(app), store, plan


def test_api_pair_payload_shape_and_blinding(client):
    http, _, plan = client
    resp = http.get("/api/pair", params={"rater": "rater-1"})
    assert resp.status_code == 200
    body = resp.json()
    assert set(body) == {"done", "pair_token", "house_id", "left", "right", "gt", "break_advisory"}
    assert body["done"] is False
    assert set(body["left"]) == {"vertices", "edges"}
    # no method identity, repeat flag, or severity hint may reach the rater
    text = resp.text
    for method in plan.methods:
        assert method not in text
    assert "sanity" not in text
    assert "repeat" not in text


def test_api_choice_roundtrip_and_replay_rejection(client):
    http, store, _ = client
    token = http.get("/api/pair", params={"rater": "rater-1"}).json()["pair_token"]
    ok = http.post("/api/choice", json={"pair_token": token, "choice": "left"})
    assert ok.status_code == 200 and ok.json() == {"accepted": True}
    dup = http.post("/api/choice", json={"pair_token": token, "choice": "right"})
    assert dup.status_code == 409
    assert len(store.load()) == 1


def test_api_double_submit_never_duplicates_records(client):
    http, store, _ = client
    accepted = 0
    for _ in range(40):
        body = http.get("/api/pair", params={"rater": "rater-1"}).json()
        if body["done"]:
            break
        token = body["pair_token"]
        first = http.post("/api/choice", json={"pair_token": token, "choice": "left"})
        second = http.post("/api/choice", json={"pair_token": token, "choice": "left"})
        assert first.status_code == 200
        assert second.status_code == 409
        accepted += 1
    assert accepted >= 5
    assert len(store.load()) == accepted


def test_api_progress_and_unknown_rater(client):
    http, _, plan = client
    assert http.get("/api/pair", params={"rater": "nobody"}).status_code == 404
    token = http.get("/api/pair", params={"rater": "rater-1"}).json()["pair_token"]
    http.post("/api/choice", json={"pair_token": token, "choice": "equal"})
    prog = http.get("/api/progress", params={"rater": "rater-1"}).json()
    assert prog["served"] == 1
    assert prog["total"] == plan.size("rater-1")
    assert prog["consistency_rate"] is None


def test_api_bad_choice_rejected(client):
    http, store, _ = client
    token = http.get("/api/pair", params={"rater": "rater-1"}).json()["pair_token"]
    resp = http.post("/api/choice", json={"pair_token": token, "choice": "both"})
    assert resp.status_code == 422
    assert store.load() == []


def test_wireframe_store_roundtrip_and_sanity_materialization(tmp_path):
    corpus = generate_corpus(1, seed=40)
    gt = {"h0": corpus[0]}
    store = WireframeStore(gt, {("h0", "m0"): corpus[0]})
    path = tmp_path / "frames.jsonl"
    store.to_jsonl(path)
    loaded = WireframeStore.from_jsonl(path)
    assert loaded.ground_truth("h0") == corpus[0]
    assert loaded.resolve("h0", "m0") == corpus[0]
    low = loaded.resolve("h0", sanity_method_id("remove", "low", 3))
    high = loaded.resolve("h0", sanity_method_id("remove", "high", 3))
    assert low.n_vertices > high.n_vertices
    # cached: same object on second resolve
    assert loaded.resolve("h0", sanity_method_id("remove", "low", 3)) is low
