"""Command-line behaviour: output shapes, exit codes, env fallbacks.

Everything runs in-process through ``main(argv)`` so coverage and
monkeypatching work; argparse exits surface as SystemExit.
"""

from __future__ import annotations

import io
import json
import math
import wave

import pytest

from termscope.cli import main
from synthdata import build_corpus


def _run(capsys, argv, expect=0):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 0
    out, err = capsys.readouterr()
    assert code == expect, f"exit {code} != {expect}; stderr: {err}"
    return out, err


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    dest = tmp_path_factory.mktemp("clicorpus")
    return build_corpus(dest, n_utterances=3, pool_size=12, k=5)


# ---------------------------------------------------------------- commands


def test_build_kb_json(corpus, capsys):
    out, _ = _run(capsys, ["build-kb", "--pool", str(corpus["terms"]), "--json"])
    doc = json.loads(out)
    assert doc == {"triplets": 12, "dim": 16}


def test_build_kb_plain(corpus, capsys):
    out, _ = _run(capsys, ["build-kb", "--pool", str(corpus["terms"])])
    assert "12 triplets" in out


def test_retrieve_default_is_jsonl(corpus, capsys):
    utt = corpus["manifest"].parent / "utt-000.semb"
    out, _ = _run(
        capsys, ["retrieve", "--pool", str(corpus["terms"]), "--utterance", str(utt)]
    )
    rows = [json.loads(line) for line in out.splitlines()]
    assert len(rows) == 5  # default k
    assert [r["rank"] for r in rows] == [1, 2, 3, 4, 5]
    gold_idx, start = corpus["golds"][0]
    assert rows[0]["triplet_id"] == f"kb-{gold_idx:04d}"
    assert rows[0]["best_window_start"] == start


def test_retrieve_json_document(corpus, capsys):
    utt = corpus["manifest"].parent / "utt-001.semb"
    out, _ = _run(
        capsys,
        [
            "retrieve",
            "--pool",
            str(corpus["terms"]),
            "--utterance",
            str(utt),
            "--k",
            "2",
            "--json",
        ],
    )
    doc = json.loads(out)
    assert len(doc["hits"]) == 2
    gold_idx, _ = corpus["golds"][1]
    assert doc["hits"][0]["triplet_id"] == f"kb-{gold_idx:04d}"


def test_retrieve_threads_env_matches_serial(corpus, capsys, monkeypatch):
    utt = corpus["manifest"].parent / "utt-000.semb"
    argv = ["retrieve", "--pool", str(corpus["terms"]), "--utterance", str(utt)]
    serial, _ = _run(capsys, argv)
    monkeypatch.setenv("TERMSCOPE_THREADS", "4")
    threaded, _ = _run(capsys, argv)
    assert threaded == serial


def test_locate_defaults_and_spans(corpus, capsys):
    utt = corpus["manifest"].parent / "utt-002.semb"
    out, _ = _run(
        capsys,
        [
            "locate",
            "--pool",
            str(corpus["terms"]),
            "--utterance",
            str(utt),
            "--k",
            "1",
            "--json",
        ],
    )
    doc = json.loads(out)
    (span,) = doc["spans"]
    gold_idx, start = corpus["golds"][2]
    assert span["utterance_id"] == "utt-002"  # file stem
    assert span["triplet_id"] == f"kb-{gold_idx:04d}"
    assert span["start_sec"] == pytest.approx(start * 0.02)
    assert span["score"] == pytest.approx(1.0, abs=1e-9)


def test_locate_frame_duration_override(corpus, capsys):
    utt = corpus["manifest"].parent / "utt-000.semb"
    out, _ = _run(
        capsys,
        [
            "locate",
            "--pool",
            str(corpus["terms"]),
            "--utterance",
            str(utt),
            "--k",
            "1",
            "--frame-duration",
            "1.0",
            "--utterance-id",
            "custom",
            "--json",
        ],
    )
    (span,) = json.loads(out)["spans"]
    _, start = corpus["golds"][0]
    assert span["utterance_id"] == "custom"
    assert span["start_sec"] == float(start)


def test_slice_writes_wav(corpus, capsys, tmp_path):
    wav_in = corpus["manifest"].parent / "utt-000.wav"
    wav_out = tmp_path / "cut.wav"
    out, _ = _run(
        capsys,
        [
            "slice",
            "--wav",
            str(wav_in),
            "--start",
            "0.1",
            "--end",
            "0.35",
            "--out",
            str(wav_out),
            "--json",
        ],
    )
    doc = json.loads(out)
    assert doc["samples"] == 4000  # 0.25 s at 16 kHz
    with wave.open(str(wav_out), "rb") as wav:
        assert wav.getnframes() == 4000
        assert wav.getframerate() == 16000


def test_missing_row_field_names_the_field(capsys, tmp_path):
    refs = tmp_path / "refs.jsonl"
    refs.write_text('{"reference": "x", "terms": []}\n', encoding="utf-8")
    _, err = _run(capsys, ["tag-refs", "--refs", str(refs)], expect=2)
    assert "missing field 'term_translations'" in err


def test_wrong_shape_row_field_is_data_error(capsys, tmp_path):
    refs = tmp_path / "refs.jsonl"
    refs.write_text(
        '{"utterance_id": "u", "reference": "x", "term_translations": [["a", "b"]]}\n',
        encoding="utf-8",
    )
    _, err = _run(capsys, ["tag-refs", "--refs", str(refs)], expect=2)
    assert "list of strings" in err


def test_slice_creates_output_directory(corpus, capsys, tmp_path):
    wav_in = corpus["manifest"].parent / "utt-000.wav"
    wav_out = tmp_path / "not" / "yet" / "there" / "cut.wav"
    _run(
        capsys,
        ["slice", "--wav", str(wav_in), "--start", "0.1", "--end", "0.2",
         "--out", str(wav_out)],
    )
    assert wav_out.is_file()


def test_slice_out_of_range_is_data_error(corpus, capsys, tmp_path):
    wav_in = corpus["manifest"].parent / "utt-000.wav"
    _, err = _run(
        capsys,
        [
            "slice",
            "--wav",
            str(wav_in),
            "--start",
            "0.0",
            "--end",
            "999.0",
            "--out",
            str(tmp_path / "x.wav"),
        ],
        expect=2,
    )
    assert "termscope: error:" in err


def test_prompt_plain_and_json(capsys):
    argv = [
        "prompt",
        "--triplet",
        "NLP|clips/nlp.wav|自然语言处理",
        "--utterance-audio",
        "utt.wav",
    ]
    out, _ = _run(capsys, argv)
    assert out.startswith("I've provided a selection of words along with their audio")
    assert out.rstrip("\n").endswith(
        "Translate from English to Chinese: <audio>utt.wav</audio>"
    )
    out, _ = _run(capsys, argv + ["--json"])
    assert "自然语言处理" in json.loads(out)["prompt"]


def test_prompt_without_triplets_is_data_error(capsys):
    _run(capsys, ["prompt", "--utterance-audio", "utt.wav"], expect=2)


def test_prompt_malformed_triplet_is_usage_error(capsys):
    _run(
        capsys,
        ["prompt", "--triplet", "no-pipes", "--utterance-audio", "u.wav"],
        expect=1,
    )


def test_tag_refs(tmp_path, capsys):
    refs = tmp_path / "refs.jsonl"
    refs.write_text(
        json.dumps(
            {
                "utterance_id": "u1",
                "reference": "包含自然语言处理的句子",
                "term_translations": ["自然语言处理"],
            },
            ensure_ascii=False,
        )
        + "\n",
        encoding="utf-8",
    )
    out, _ = _run(capsys, ["tag-refs", "--refs", str(refs)])
    row = json.loads(out)
    assert row["tagged_reference"] == "包含<Term> 自然语言处理的句子"


def test_strip_tags_text_flag(capsys):
    out, _ = _run(capsys, ["strip-tags", "--text", "a <Term> b"])
    assert out == "a b\n"


def test_strip_tags_reads_stdin(capsys, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO("<Term> x\ny <Term> z\n"))
    out, _ = _run(capsys, ["strip-tags"])
    assert out == "x\ny z\n"


def test_filter_asr_flags(capsys):
    out, _ = _run(
        capsys, ["filter-asr", "--term", "Neural Network", "--transcript", "neural network"]
    )
    row = json.loads(out)
    assert row["decision"] == "keep"
    assert row["distance"] == 0


def test_filter_asr_file_input(tmp_path, capsys):
    path = tmp_path / "asr.jsonl"
    rows = [
        {"term": "abcdefgh", "transcript": "abcde"},  # distance 3: keep
        {"term": "abcdefgh", "transcript": "abcd"},  # distance 4: discard
    ]
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    out, _ = _run(capsys, ["filter-asr", "--in", str(path), "--json"])
    results = json.loads(out)["results"]
    assert [r["decision"] for r in results] == ["keep", "discard"]
    assert [r["distance"] for r in results] == [3, 4]


def test_filter_asr_without_input_is_data_error(capsys):
    _run(capsys, ["filter-asr"], expect=2)


def test_eval_hits_default_cutoffs(tmp_path, capsys):
    cases = tmp_path / "cases.jsonl"
    rows = [
        {"utterance_id": "u1", "gold_triplet_ids": ["A", "B"], "ranked_ids": ["B", "C", "A"]},
        {"utterance_id": "u2", "gold_triplet_ids": ["D"], "ranked_ids": ["D"]},
    ]
    cases.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    out, _ = _run(capsys, ["eval-hits", "--cases", str(cases), "--json"])
    reports = json.loads(out)["reports"]
    assert [r["metric"] for r in reports] == ["hits@1", "hits@5", "hits@10"]
    assert reports[0] == {
        "metric": "hits@1",
        "value": pytest.approx(2 / 3),
        "numerator": 2,
        "denominator": 3,
    }
    assert reports[1]["value"] == 1.0


def test_eval_hits_explicit_n(tmp_path, capsys):
    cases = tmp_path / "cases.jsonl"
    cases.write_text(
        json.dumps(
            {"utterance_id": "u", "gold_triplet_ids": ["A"], "ranked_ids": ["B", "A"]}
        )
        + "\n",
        encoding="utf-8",
    )
    out, _ = _run(capsys, ["eval-hits", "--cases", str(cases), "--n", "2"])
    assert out == "hits@2: 1.000000 (1/1)\n"


def test_eval_tsr(tmp_path, capsys):
    cases = tmp_path / "tsr.jsonl"
    rows = [
        {"utterance_id": "u1", "hypothesis": "alpha beta", "term_targets": ["alpha", "beta", "gamma"]},
    ]
    cases.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    out, _ = _run(capsys, ["eval-tsr", "--cases", str(cases), "--json"])
    doc = json.loads(out)
    assert doc["numerator"] == 2
    assert doc["denominator"] == 3
    assert doc["value"] == pytest.approx(2 / 3)


def test_loss_command(capsys):
    argv = ["loss", "--pos", "0.9"] + ["--neg", "0.9"] * 4
    out, _ = _run(capsys, argv)
    # plain text prints 12 significant digits
    assert float(out) == pytest.approx(math.log(5.0), abs=1e-10)
    out, _ = _run(capsys, argv + ["--json"])
    assert json.loads(out)["loss"] == pytest.approx(math.log(5.0), abs=1e-12)
    out, _ = _run(capsys, ["loss", "--pos", "1.5", "--json"])
    assert json.loads(out)["loss"] == 0.0


def test_run_command(corpus, capsys, tmp_path):
    out_dir = tmp_path / "cli_out"
    out, _ = _run(
        capsys,
        [
            "run",
            "--config",
            str(corpus["config"]),
            "--out-dir",
            str(out_dir),
            "--json",
        ],
    )
    report = json.loads(out)
    assert report["completed"] == 3
    assert report["hits_at_n"]["1"] == 1.0
    assert (out_dir / "report.json").is_file()
    assert (out_dir / "utt-000" / "bundle.json").is_file()


def test_run_command_plain_output(corpus, capsys, tmp_path):
    out, _ = _run(
        capsys,
        ["run", "--config", str(corpus["config"]), "--out-dir", str(tmp_path / "o")],
    )
    assert "processed 3/3 utterances" in out
    assert "hits@1: 1.000000" in out


def test_bench_small_sizes(capsys):
    out, _ = _run(
        capsys,
        [
            "bench",
            "--pool-size",
            "3",
            "--frames",
            "40",
            "--dim",
            "8",
            "--clip-frames",
            "5",
            "--warmup",
            "1",
            "--measured",
            "3",
            "--naive-query-iterations",
            "1",
            "--json",
        ],
    )
    report = json.loads(out)
    assert report["pooling"]["results_equal"] is True
    assert report["query"]["results_equal"] is True
    assert report["pooling"]["optimized"]["iterations"] == 3
    assert report["query"]["naive"]["iterations"] == 1
    assert report["pooling"]["speedup_naive_over_optimized"] > 0


# ---------------------------------------------------------------- exit codes


def test_no_command_is_usage_error(capsys):
    _run(capsys, [], expect=1)


def test_unknown_command_is_usage_error(capsys):
    _run(capsys, ["frobnicate"], expect=1)


def test_unknown_flag_is_usage_error(capsys):
    _run(capsys, ["build-kb", "--pool", "x", "--bogus"], expect=1)


def test_help_exits_zero(capsys):
    _run(capsys, ["--help"], expect=0)


def test_missing_pool_file_is_data_error(capsys):
    _, err = _run(capsys, ["build-kb", "--pool", "/nonexistent/terms.jsonl"], expect=2)
    assert "termscope: error:" in err
