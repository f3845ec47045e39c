"""Annotation serving: comparison plans, rater sessions, and the record store.

The flow mirrors a pairwise study: every rater sees every method pair for
every house exactly once (in a private seeded order, sides randomized),
with occasional flipped re-asks to measure self-consistency and a sprinkle
of low-vs-high corruption pairs to measure attentiveness.  Answers land in
an append-only line store from which all session state can be replayed.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import os
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corruptions import CORRUPTION_KINDS, corrupt, make_spec
from .geometry import Wireframe
from .ranking import ChoiceRecord

__all__ = [
    "PlanEntry",
    "ComparisonPlan",
    "build_plan",
    "save_plan",
    "load_plan",
    "RecordStore",
    "Session",
    "PairPresentation",
    "WireframeStore",
    "RaterReliability",
    "rater_reliability",
    "create_app",
    "REPEAT_RATE",
    "SANITY_RATE",
    "BREAK_INTERVAL",
    "SANITY_PREFIX",
]

REPEAT_RATE = 0.05
SANITY_RATE = 0.02
BREAK_INTERVAL = 350
SANITY_PREFIX = "sanity:"


def _tag(text: str) -> int:
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "big")


# ---------------------------------------------------------------------------
# plan
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlanEntry:
    """One scheduled comparison; ``first < second`` is the canonical order.

    ``flip`` controls presentation only: the rater sees (second, first)
    when set.  Sanity entries pit a mild corruption against a severe one;
    their synthetic method ids embed kind, severity and seed.
    """

    house: str
    first: str
    second: str
    flip: bool
    is_sanity: bool = False

    def presented(self, extra_flip: bool = False) -> tuple[str, str]:
        if self.flip ^ extra_flip:
            return self.second, self.first
        return self.first, self.second


@dataclass
class ComparisonPlan:
    houses: list[str]
    methods: list[str]
    raters: list[str]
    seed: int
    sanity_rate: float
    entries: dict[str, list[PlanEntry]]

    @property
    def base_pair_count(self) -> int:
        m = len(self.methods)
        return m * (m - 1) // 2 * len(self.houses)

    def size(self, rater: str) -> int:
        return len(self.entries[rater])


def sanity_method_id(kind: str, severity: str, seed: int) -> str:
    return f"{SANITY_PREFIX}{kind}:{severity}:{seed}"


def parse_sanity_id(method_id: str) -> tuple[str, str, int] | None:
    """(kind, severity, seed) for a sanity id, None for a real method."""
    if not method_id.startswith(SANITY_PREFIX):
        return None
    parts = method_id[len(SANITY_PREFIX):].split(":")
    if len(parts) != 3:
        return None
    kind, severity, seed = parts
    return kind, severity, int(seed)


def _check_ids(label: str, ids) -> list[str]:
    ids = list(ids)
    if len(set(ids)) != len(ids):
        raise ValueError(f"duplicate {label} ids")
    if any(not i for i in ids):
        raise ValueError(f"empty {label} id")
    for i in ids:
        if i.startswith(SANITY_PREFIX):
            raise ValueError(f"{label} id {i!r} collides with the sanity namespace")
    return ids


def build_plan(houses, methods, raters, seed: int, sanity_rate: float = SANITY_RATE) -> ComparisonPlan:
    """Exhaustive per-rater comparison schedule with interleaved sanity pairs.

    Every unordered method pair appears once per house per rater, shuffled
    and side-randomized under the rater's own substream; sanity pairs are
    inserted at uniform positions at ``sanity_rate`` on top of the base
    pairs.  Deterministic given (houses, methods, raters, seed).
    """
    houses = _check_ids("house", houses)
    methods = _check_ids("method", methods)
    raters = _check_ids("rater", raters)
    if len(methods) < 2:
        raise ValueError("need at least 2 methods")
    if not houses:
        raise ValueError("need at least 1 house")
    if not raters:
        raise ValueError("need at least 1 rater")

    base = [
        (h, a, b)
        for h in houses
        for a, b in itertools.combinations(sorted(methods), 2)
    ]
    entries: dict[str, list[PlanEntry]] = {}
    for rater in raters:
        rng = np.random.default_rng(np.random.SeedSequence([seed, _tag(rater)]))
        order = rng.permutation(len(base))
        plan = [
            PlanEntry(*base[k], flip=bool(rng.uniform() < 0.5))
            for k in order
        ]
        n_sanity = round(sanity_rate * len(base))
        for _ in range(n_sanity):
            house = houses[int(rng.integers(len(houses)))]
            kind = CORRUPTION_KINDS[int(rng.integers(len(CORRUPTION_KINDS)))]
            sanity_seed = int(rng.integers(2**31))
            low = sanity_method_id(kind, "low", sanity_seed)
            high = sanity_method_id(kind, "high", sanity_seed)
            first, second = sorted((low, high))
            entry = PlanEntry(house, first, second, flip=bool(rng.uniform() < 0.5), is_sanity=True)
            plan.insert(int(rng.integers(len(plan) + 1)), entry)
        entries[rater] = plan
    return ComparisonPlan(houses, methods, raters, seed, sanity_rate, entries)


def save_plan(plan: ComparisonPlan, path) -> None:
    doc = {
        "houses": plan.houses,
        "methods": plan.methods,
        "raters": plan.raters,
        "seed": plan.seed,
        "sanity_rate": plan.sanity_rate,
        "entries": {
            rater: [
                [e.house, e.first, e.second, int(e.flip), int(e.is_sanity)]
                for e in entries
            ]
            for rater, entries in plan.entries.items()
        },
    }
    Path(path).write_text(json.dumps(doc, indent=1), encoding="utf-8")


def load_plan(path) -> ComparisonPlan:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    entries = {
        rater: [
            PlanEntry(house, first, second, bool(flip), bool(sanity))
            for house, first, second, flip, sanity in rows
        ]
        for rater, rows in doc["entries"].items()
    }
    return ComparisonPlan(
        doc["houses"], doc["methods"], doc["raters"],
        int(doc["seed"]), float(doc["sanity_rate"]), entries,
    )


# ---------------------------------------------------------------------------
# record store
# ---------------------------------------------------------------------------


class RecordStore:
    """Append-only line store of ChoiceRecords with fsync-on-append."""

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.touch(exist_ok=True)

    def append(self, record: ChoiceRecord) -> None:
        line = record.to_json() + "\n"
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line)
                fh.flush()
                os.fsync(fh.fileno())

    def load(self) -> list[ChoiceRecord]:
        with self._lock:
            out = []
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        out.append(ChoiceRecord.from_json(line))
            return out


# ---------------------------------------------------------------------------
# session
# ---------------------------------------------------------------------------


@dataclass
class PairPresentation:
    """What the rater gets: ids in presentation order plus a one-shot token."""

    token: str
    house: str
    left_id: str
    right_id: str
    break_advisory: bool
    is_repeat: bool  # internal bookkeeping; never exposed to the rater


@dataclass
class _Pending:
    token: str
    entry: PlanEntry
    extra_flip: bool
    is_repeat: bool


class Session:
    """One rater's walk through their plan.

    State is fully reconstructable from the record store: the cursor is the
    number of non-repeat answers, and the serve-time randomness (repeat or
    not, which pair to re-ask) is keyed on (plan seed, rater, answer
    ordinal), so an issued-but-unanswered pair is simply re-served after a
    crash.  Only the latest issued token is live; issuing a new pair
    invalidates the previous unanswered one, which keeps double-submits and
    stale tabs from ever producing two records for one serve.
    """

    def __init__(self, rater: str, plan: ComparisonPlan, store: RecordStore,
                 repeat_rate: float = REPEAT_RATE, records=None):
        if rater not in plan.entries:
            raise KeyError(f"rater {rater!r} not in plan")
        self.rater = rater
        self.plan = plan
        self.store = store
        self.repeat_rate = repeat_rate
        self.entries = plan.entries[rater]
        self.cursor = 0
        self.answered = 0
        self._pool: list[PlanEntry] = []  # non-repeat entries already answered
        self._pending: _Pending | None = None
        for record in records if records is not None else store.load():
            if record.rater == rater:
                self._replay(record)

    def _replay(self, record: ChoiceRecord) -> None:
        if not record.is_consistency_repeat:
            if self.cursor >= len(self.entries):
                raise ValueError("store has more base answers than the plan")
            entry = self.entries[self.cursor]
            if (record.house, record.left, record.right) != (entry.house, entry.first, entry.second):
                raise ValueError(
                    f"store/plan mismatch at base answer {self.cursor}: "
                    f"{(record.house, record.left, record.right)} vs "
                    f"{(entry.house, entry.first, entry.second)}"
                )
            self._pool.append(entry)
            self.cursor += 1
        self.answered += 1

    def _serve_rng(self) -> np.random.Generator:
        return np.random.default_rng(
            np.random.SeedSequence([self.plan.seed, _tag(self.rater), self.answered])
        )

    def next_pair(self) -> PairPresentation | None:
        """Serve the next presentation, or None when the plan is complete."""
        rng = self._serve_rng()
        is_repeat = bool(self._pool) and rng.uniform() < self.repeat_rate
        if is_repeat:
            entry = self._pool[int(rng.integers(len(self._pool)))]
            extra_flip = True  # re-asks always swap the sides
        elif self.cursor < len(self.entries):
            entry = self.entries[self.cursor]
            extra_flip = False
        else:
            self._pending = None
            return None
        left, right = entry.presented(extra_flip)
        token = secrets.token_hex(16)
        self._pending = _Pending(token, entry, extra_flip, is_repeat)
        serve_ordinal = self.answered + 1
        return PairPresentation(
            token=token,
            house=entry.house,
            left_id=left,
            right_id=right,
            break_advisory=serve_ordinal % BREAK_INTERVAL == 0,
            is_repeat=is_repeat,
        )

    def record_choice(self, token: str, choice: str) -> ChoiceRecord:
        """Persist an answer for the live token; canonical sides, then advance."""
        pending = self._pending
        if pending is None or token != pending.token:
            raise ValueError("unknown or already-spent pair token")
        if choice not in ("left", "right", "equal"):
            raise ValueError(f"choice must be left/right/equal, got {choice!r}")
        if choice == "equal":
            canonical = "equal"
        else:
            left_id, right_id = pending.entry.presented(pending.extra_flip)
            winner = left_id if choice == "left" else right_id
            canonical = "left" if winner == pending.entry.first else "right"
        record = ChoiceRecord(
            rater=self.rater,
            house=pending.entry.house,
            left=pending.entry.first,
            right=pending.entry.second,
            choice=canonical,
            is_consistency_repeat=pending.is_repeat,
            timestamp=time.time(),
        )
        self.store.append(record)
        self._pending = None
        if not pending.is_repeat:
            self._pool.append(pending.entry)
            self.cursor += 1
        self.answered += 1
        return record

    @property
    def done(self) -> bool:
        return self.cursor >= len(self.entries)

    def progress(self) -> dict:
        return {"served": self.answered, "total": len(self.entries)}


# ---------------------------------------------------------------------------
# wireframe store
# ---------------------------------------------------------------------------


class WireframeStore:
    """Ground truth per house plus candidate reconstructions per method.

    Sanity-pair sides are materialized on demand by corrupting the house's
    ground truth with the (kind, severity, seed) baked into the id.
    """

    def __init__(self, gt: dict[str, Wireframe], candidates: dict[tuple[str, str], Wireframe]):
        self.gt = dict(gt)
        self.candidates = dict(candidates)
        self._sanity_cache: dict[tuple[str, str], Wireframe] = {}

    def ground_truth(self, house: str) -> Wireframe:
        return self.gt[house]

    def resolve(self, house: str, method_id: str) -> Wireframe:
        parsed = parse_sanity_id(method_id)
        if parsed is None:
            return self.candidates[(house, method_id)]
        key = (house, method_id)
        if key not in self._sanity_cache:
            kind, severity, seed = parsed
            wf, _ = corrupt(self.gt[house], make_spec(kind, severity, seed))
            self._sanity_cache[key] = wf
        return self._sanity_cache[key]

    def to_jsonl(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for house, wf in sorted(self.gt.items()):
                fh.write(json.dumps({"house": house, "method": None, **wf.to_json_dict()}) + "\n")
            for (house, method), wf in sorted(self.candidates.items()):
                fh.write(json.dumps({"house": house, "method": method, **wf.to_json_dict()}) + "\n")

    @classmethod
    def from_jsonl(cls, path) -> "WireframeStore":
        gt: dict[str, Wireframe] = {}
        candidates: dict[tuple[str, str], Wireframe] = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                d = json.loads(line)
                wf = Wireframe(np.asarray(d["vertices"], dtype=np.float64), d["edges"])
                if d.get("method") is None:
                    gt[d["house"]] = wf
                else:
                    candidates[(d["house"], d["method"])] = wf
        return cls(gt, candidates)


# ---------------------------------------------------------------------------
# reliability
# ---------------------------------------------------------------------------


@dataclass
class RaterReliability:
    n_answered: int
    n_repeats: int
    consistency: float | None
    n_sanity: int
    sanity_accuracy: float | None


def _winner(record: ChoiceRecord) -> str | None:
    if record.choice == "equal":
        return None
    return record.left if record.choice == "left" else record.right


def rater_reliability(records) -> dict[str, RaterReliability]:
    """Self-consistency on re-asked pairs and accuracy on sanity pairs.

    Consistency compares each repeat against the rater's first answer for
    the same (house, pair) key, orientation-independently.  Sanity accuracy
    is the fraction of low-vs-high corruption pairs where the rater picked
    the low-severity side.  Raters with no repeats (or no sanity pairs)
    get None for that statistic, not zero.
    """
    by_rater: dict[str, list[ChoiceRecord]] = {}
    for r in records:
        by_rater.setdefault(r.rater, []).append(r)
    out = {}
    for rater, recs in sorted(by_rater.items()):
        originals: dict[tuple, str] = {}
        consistent = repeats = 0
        sanity_total = sanity_correct = 0
        for r in recs:
            if r.is_consistency_repeat:
                key = r.pair_key()
                if key in originals:
                    repeats += 1
                    consistent += originals[key] == r.oriented_choice()
                continue
            originals.setdefault(r.pair_key(), r.oriented_choice())
            left_sanity = parse_sanity_id(r.left)
            right_sanity = parse_sanity_id(r.right)
            if left_sanity and right_sanity:
                sanity_total += 1
                winner = _winner(r)
                if winner is not None and parse_sanity_id(winner)[1] == "low":
                    sanity_correct += 1
        out[rater] = RaterReliability(
            n_answered=len(recs),
            n_repeats=repeats,
            consistency=consistent / repeats if repeats else None,
            n_sanity=sanity_total,
            sanity_accuracy=sanity_correct / sanity_total if sanity_total else None,
        )
    return out


# ---------------------------------------------------------------------------
# HTTP API
# ---------------------------------------------------------------------------


def create_app(plan: ComparisonPlan, store: RecordStore, wireframes: WireframeStore,
               repeat_rate: float = REPEAT_RATE):
    """FastAPI app exposing the pair/choice/progress endpoints.

    Method identities and repeat flags never leave the server; responses
    carry only wireframe geometry and a one-shot token.  A single lock
    serializes all session mutations (the store is the source of truth).
    """
    from fastapi import FastAPI, HTTPException
    from fastapi.middleware.cors import CORSMiddleware
    from pydantic import BaseModel

    class ChoiceBody(BaseModel):
        pair_token: str
        choice: str

    app = FastAPI(title="wiremetrics annotation service")
    # the browser UI is plain static files, typically served from a different
    # port than this API, so cross-origin requests (and their preflights)
    # must be answered
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    lock = threading.Lock()
    preloaded = store.load()
    sessions: dict[str, Session] = {}
    token_owner: dict[str, str] = {}

    def session_for(rater: str) -> Session:
        if rater not in plan.entries:
            raise HTTPException(status_code=404, detail=f"unknown rater {rater!r}")
        if rater not in sessions:
            sessions[rater] = Session(rater, plan, store, repeat_rate, records=preloaded)
        return sessions[rater]

    @app.get("/api/pair")
    def get_pair(rater: str):
        with lock:
            session = session_for(rater)
            pair = session.next_pair()
            if pair is None:
                return {"done": True}
            token_owner[pair.token] = rater
            return {
                "done": False,
                "pair_token": pair.token,
                "house_id": pair.house,
                "left": wireframes.resolve(pair.house, pair.left_id).to_json_dict(),
                "right": wireframes.resolve(pair.house, pair.right_id).to_json_dict(),
                "gt": wireframes.ground_truth(pair.house).to_json_dict(),
                "break_advisory": pair.break_advisory,
            }

    def post_choice(body):
        if body.choice not in ("left", "right", "equal"):
            raise HTTPException(status_code=422, detail="choice must be left/right/equal")
        with lock:
            rater = token_owner.pop(body.pair_token, None)
            if rater is None:
                raise HTTPException(status_code=409, detail="unknown or spent token")
            try:
                sessions[rater].record_choice(body.pair_token, body.choice)
            except ValueError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
            return {"accepted": True}

    # ChoiceBody is local to this factory, so a source annotation (stringified
    # under postponed evaluation) would be unresolvable when the route builds
    # its signature; attach the class object directly instead.
    post_choice.__annotations__ = {"body": ChoiceBody}
    app.post("/api/choice")(post_choice)

    @app.get("/api/progress")
    def get_progress(rater: str):
        with lock:
            session = session_for(rater)
            reliability = rater_reliability(
                [r for r in store.load() if r.rater == rater]
            ).get(rater)
            return {
                **session.progress(),
                "consistency_rate": reliability.consistency if reliability else None,
            }

    return app
