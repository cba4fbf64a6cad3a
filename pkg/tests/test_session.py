import json

import numpy as np
import pytest

from labelloop.corpus import Corpus, Document
from labelloop.errors import SessionError
from labelloop.session import (
    Phase,
    RoundRecord,
    SessionConfig,
    create_session,
    export_history,
    load_session,
    next_batch,
    run_simulation,
    save_session,
    session_from_json,
    session_to_json,
    should_stop,
    submit_labels,
)
from labelloop.strategies import QueryStrategy
from labelloop.synthetic import make_blob_corpus


def small_corpus(n=60, dim=4, seed=0):
    return make_blob_corpus(n_docs=n, dim=dim, separation=2.5, rng_seed=seed)


def small_config(corpus, **overrides):
    defaults = dict(
        label_set=list(corpus.label_set),
        test_fraction=0.2,
        n_seed=10,
        batch_size=5,
        max_rounds=3,
        rng_seed=7,
    )
    defaults.update(overrides)
    return SessionConfig(**defaults)


def label_all_pending(state):
    _, ids, docs = next_batch(state)
    return submit_labels(state, {d.id: d.gold_label for d in docs})


# --- create_session -----------------------------------------------------------


def test_create_session_default_budgets():
    corpus = make_blob_corpus(n_docs=2458, dim=16, rng_seed=0)
    config = SessionConfig(label_set=list(corpus.label_set), rng_seed=0)
    state = create_session(corpus, config)
    assert len(state.test_ids) == 492
    assert len(state.pool_ids()) == 1966
    assert len(state.pending_batch) == 160
    assert state.round == 0
    assert state.phase == Phase.AWAITING_SEED_LABELS


def test_create_session_deterministic():
    corpus = small_corpus()
    a = create_session(corpus, small_config(corpus))
    b = create_session(corpus, small_config(corpus))
    assert a.pending_batch == b.pending_batch
    assert a.test_ids == b.test_ids
    assert a.unlabeled_ids == b.unlabeled_ids


def test_create_session_seed_too_large():
    corpus = small_corpus(n=20)
    with pytest.raises(SessionError, match="exceeds pool size"):
        create_session(corpus, small_config(corpus, n_seed=17))  # pool is 16


def test_create_session_label_set_must_match():
    corpus = small_corpus()
    config = SessionConfig(label_set=["x", "y"], n_seed=5, rng_seed=0)
    with pytest.raises(SessionError, match="label set"):
        create_session(corpus, config)


def test_create_session_requires_embeddings():
    docs = [Document(id=f"d{i}", text="t", gold_label="A" if i % 2 else "B") for i in range(10)]
    corpus = Corpus(docs)
    config = SessionConfig(label_set=list(corpus.label_set), n_seed=2, batch_size=2, rng_seed=0)
    with pytest.raises(SessionError, match="no embedding"):
        create_session(corpus, config)


def test_create_session_does_not_mutate_source_corpus():
    corpus = small_corpus()
    state = create_session(corpus, small_config(corpus))
    label_all_pending(state)
    assert all(doc.assigned_label is None for doc in corpus)


# --- next_batch / submit_labels -------------------------------------------------


def test_next_batch_idempotent():
    corpus = small_corpus()
    state = create_session(corpus, small_config(corpus))
    first = next_batch(state)
    second = next_batch(state)
    assert first[0] == second[0] == 0
    assert first[1] == second[1]


def test_partial_submissions_accumulate():
    corpus = small_corpus()
    state = create_session(corpus, small_config(corpus))
    _, ids, docs = next_batch(state)
    by_id = {d.id: d for d in docs}
    record = submit_labels(state, {ids[0]: by_id[ids[0]].gold_label})
    assert record is None
    assert state.phase == Phase.AWAITING_SEED_LABELS
    record = submit_labels(state, {i: by_id[i].gold_label for i in ids[1:]})
    assert record is not None
    assert record.round == 0
    assert record.n_labeled == 10


def test_submit_validation_errors_leave_state_unchanged():
    corpus = small_corpus()
    state = create_session(corpus, small_config(corpus))
    _, ids, docs = next_batch(state)
    before = session_to_json(state)
    with pytest.raises(SessionError, match="unknown id"):
        submit_labels(state, {"nope": corpus.label_set[0]})
    with pytest.raises(SessionError, match="not in the pending batch"):
        submit_labels(state, {state.unlabeled_ids[0]: corpus.label_set[0]})
    with pytest.raises(SessionError, match="not in the session label set"):
        submit_labels(state, {ids[0]: "Bogus"})
    assert session_to_json(state) == before


def test_relabeling_labeled_document_rejected():
    corpus = small_corpus()
    state = create_session(corpus, small_config(corpus))
    record = label_all_pending(state)
    labeled_id = record.queried_ids[0]
    with pytest.raises(SessionError, match="already labeled"):
        submit_labels(state, {labeled_id: corpus.label_set[0]})


def test_round_completion_schedule():
    corpus = small_corpus()
    state = create_session(corpus, small_config(corpus))
    label_all_pending(state)
    assert state.n_labeled() == 10
    assert state.round == 1
    assert state.phase == Phase.AWAITING_BATCH_LABELS
    assert len(state.pending_batch) == 5
    for query_round in range(1, 4):
        label_all_pending(state)
        assert state.n_labeled() == 10 + query_round * 5
    assert state.phase == Phase.DONE
    with pytest.raises(SessionError):
        next_batch(state)


def test_partition_invariant_after_each_step():
    corpus = small_corpus()
    state = create_session(corpus, small_config(corpus))
    state.check_partition()
    while state.phase in (Phase.AWAITING_SEED_LABELS, Phase.AWAITING_BATCH_LABELS):
        _, ids, docs = next_batch(state)
        half = len(ids) // 2
        submit_labels(state, {d.id: d.gold_label for d in docs[:half]})
        state.check_partition()
        submit_labels(state, {d.id: d.gold_label for d in docs[half:]})
        state.check_partition()


def test_labeled_in_round_recorded():
    corpus = small_corpus()
    state = create_session(corpus, small_config(corpus))
    label_all_pending(state)
    label_all_pending(state)
    rounds = {state.corpus.by_id[i].labeled_in_round for i in state.labeled_ids}
    assert rounds == {0, 1}


# --- stopping -------------------------------------------------------------------


def test_should_stop_max_rounds():
    corpus = small_corpus()
    state = create_session(corpus, small_config(corpus, max_rounds=0))
    label_all_pending(state)
    assert state.phase == Phase.DONE
    stop, reason = should_stop(state)
    assert stop and reason == "max_rounds"


def test_should_stop_pool_exhausted_truncates_batch():
    corpus = small_corpus(n=30)  # pool 24
    config = small_config(corpus, n_seed=20, batch_size=16, max_rounds=5)
    history = run_simulation(corpus, config)
    assert [r.n_labeled for r in history] == [20, 24]
    assert len(history[-1].queried_ids) == 4  # truncated to the remaining pool


def test_should_stop_f1_threshold():
    corpus = small_corpus(n=80)
    config = small_config(corpus, stop_f1_threshold=0.01, max_rounds=5)
    history = run_simulation(corpus, config)
    assert len(history) == 1  # threshold hit after the seed round


def test_threshold_not_reached_continues():
    corpus = small_corpus(n=80)
    config = small_config(corpus, stop_f1_threshold=0.999999, max_rounds=2)
    history = run_simulation(corpus, config)
    assert len(history) == 3  # seed + 2 query rounds; stopped by max_rounds


# --- simulation -----------------------------------------------------------------


def test_simulation_deterministic():
    corpus = small_corpus()
    config = small_config(corpus)
    first = run_simulation(corpus, config)
    second = run_simulation(corpus, config)
    assert len(first) == len(second) == 4
    for a, b in zip(first, second):
        assert a.queried_ids == b.queried_ids
        assert a.macro_f1 == b.macro_f1
        assert a.n_labeled == b.n_labeled


def test_simulation_label_schedule():
    corpus = small_corpus(n=100)
    config = small_config(corpus, n_seed=16, batch_size=4, max_rounds=4)
    history = run_simulation(corpus, config)
    assert [r.n_labeled for r in history] == [16, 20, 24, 28, 32]
    assert [r.round for r in history] == [0, 1, 2, 3, 4]


def test_simulation_requires_gold_labels():
    docs = [Document(id=f"d{i}", text="", embedding=np.ones(3)) for i in range(10)]
    docs[0].gold_label = "A"
    docs[1].gold_label = "B"
    corpus = Corpus(docs)
    config = SessionConfig(label_set=["A", "B"], n_seed=2, batch_size=2, rng_seed=0)
    with pytest.raises(SessionError, match="gold labels"):
        run_simulation(corpus, config)


def test_margin_and_random_share_protocol_structure():
    corpus = small_corpus(n=100)
    margin = run_simulation(corpus, small_config(corpus, strategy=QueryStrategy.MARGIN))
    random = run_simulation(corpus, small_config(corpus, strategy=QueryStrategy.RANDOM))
    assert [r.round for r in margin] == [r.round for r in random]
    assert [r.n_labeled for r in margin] == [r.n_labeled for r in random]
    assert margin[0].queried_ids == random[0].queried_ids  # same seed set
    assert any(a.queried_ids != b.queried_ids for a, b in zip(margin[1:], random[1:]))


def test_history_macro_f1_recomputable_from_confusion():
    from labelloop.classifier import metrics_from_confusion

    corpus = small_corpus(n=100)
    history = run_simulation(corpus, small_config(corpus))
    for record in history:
        recomputed = metrics_from_confusion(np.asarray(record.confusion), list(record.per_class_f1))
        assert recomputed.macro_f1 == record.macro_f1
        assert recomputed.accuracy == record.accuracy


def test_minority_fraction_in_range():
    corpus = small_corpus(n=100)
    history = run_simulation(corpus, small_config(corpus))
    for record in history:
        assert 0.0 <= record.minority_fraction <= 1.0


# --- live mode (no gold labels) ---------------------------------------------------


def live_corpus(n=40, dim=4):
    rng = np.random.default_rng(3)
    docs = [Document(id=f"d{i:03d}", text=f"text {i}", embedding=rng.normal(size=dim)) for i in range(n)]
    return Corpus(docs, label_set=["yes", "no"])


def test_live_mode_records_have_no_metrics():
    corpus = live_corpus()
    config = SessionConfig(label_set=["yes", "no"], n_seed=6, batch_size=4, max_rounds=1, rng_seed=1)
    state = create_session(corpus, config)
    _, ids, docs = next_batch(state)
    record = submit_labels(state, {d.id: "yes" if int(d.id[1:]) % 2 else "no" for d in docs})
    assert record.macro_f1 is None
    assert record.accuracy is None
    assert record.per_class_f1 is None
    assert record.minority_fraction is None
    assert state.current_head is not None


def test_live_mode_rejects_f1_threshold():
    corpus = live_corpus()
    config = SessionConfig(
        label_set=["yes", "no"], n_seed=6, batch_size=4, max_rounds=1, rng_seed=1, stop_f1_threshold=0.9
    )
    with pytest.raises(SessionError, match="stop_f1_threshold"):
        create_session(corpus, config)


# --- export ---------------------------------------------------------------------


def test_export_csv_shape_and_formatting():
    record = RoundRecord(
        round=0,
        n_labeled=160,
        macro_f1=0.8351,
        accuracy=0.9,
        per_class_f1={"A": 0.5, "B": 1.0},
        queried_ids=["x"],
        minority_fraction=0.25,
        wall_time_ms=12.0,
    )
    data = export_history([record]).decode()
    lines = data.strip().split("\n")
    assert len(lines) == 2
    assert lines[0] == "round,n_labeled,macro_f1,accuracy,f1_A,f1_B,minority_fraction"
    assert lines[1] == "0,160,0.835100,0.900000,0.500000,1.000000,0.250000"


def test_export_deterministic_across_identical_runs():
    corpus = small_corpus(n=100)
    first = export_history(run_simulation(corpus, small_config(corpus)))
    second = export_history(run_simulation(corpus, small_config(corpus)))
    assert first == second


def test_export_empty_history_rejected():
    with pytest.raises(ValueError):
        export_history([])


def test_export_eleven_rows_for_ten_query_rounds():
    corpus = small_corpus(n=500, dim=8)
    config = small_config(corpus, n_seed=40, batch_size=10, max_rounds=10)
    data = export_history(run_simulation(corpus, config)).decode()
    rows = data.strip().split("\n")[1:]
    assert len(rows) == 11


# --- persistence -------------------------------------------------------------------


def test_save_load_roundtrip_mid_round(tmp_path):
    corpus = small_corpus()
    state = create_session(corpus, small_config(corpus))
    label_all_pending(state)
    # Partially label the next batch, then snapshot.
    _, ids, docs = next_batch(state)
    submit_labels(state, {docs[0].id: docs[0].gold_label})
    path = tmp_path / "session.json"
    save_session(state, path)
    loaded = load_session(path)
    assert session_to_json(loaded) == session_to_json(state)
    assert next_batch(loaded)[1] == next_batch(state)[1]
    assert np.array_equal(loaded.current_head.weights, state.current_head.weights)
    assert loaded.pending_labels == state.pending_labels


def test_save_load_roundtrip_fresh_session(tmp_path):
    corpus = small_corpus()
    state = create_session(corpus, small_config(corpus))
    path = tmp_path / "fresh.json"
    save_session(state, path)
    assert session_to_json(load_session(path)) == session_to_json(state)


def test_loaded_session_continues_identically(tmp_path):
    corpus = small_corpus()
    config = small_config(corpus)
    full_history = run_simulation(corpus, config)

    state = create_session(corpus, config)
    label_all_pending(state)
    path = tmp_path / "mid.json"
    save_session(state, path)
    resumed = load_session(path)
    while resumed.phase in (Phase.AWAITING_SEED_LABELS, Phase.AWAITING_BATCH_LABELS):
        label_all_pending(resumed)
    assert [r.queried_ids for r in resumed.history] == [r.queried_ids for r in full_history]
    assert [r.macro_f1 for r in resumed.history] == [r.macro_f1 for r in full_history]


def test_tampered_file_rejected(tmp_path):
    corpus = small_corpus()
    state = create_session(corpus, small_config(corpus))
    path = tmp_path / "session.json"
    save_session(state, path)
    raw = path.read_bytes()
    tampered = raw.replace(state.pending_batch[0].encode(), b"doc-XXXX", 1)
    assert tampered != raw
    path.write_bytes(tampered)
    with pytest.raises(SessionError, match="checksum|corrupted"):
        load_session(path)


def test_version_mismatch_rejected(tmp_path):
    corpus = small_corpus()
    state = create_session(corpus, small_config(corpus))
    doc = json.loads(session_to_json(state))
    doc["version"] = 99
    path = tmp_path / "session.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(SessionError, match="version"):
        load_session(path)


def test_invalid_json_rejected():
    with pytest.raises(SessionError):
        session_from_json(b"{not json")
