#!/usr/bin/env python3
"""Regenerate tests/fixtures/mini.

Writes a small two-language corpus with Gutenberg-style markers, then runs
`genreforge ingest` over every sentence to learn the sentence ids and emits
heuristic dependency parses, a metaphor proxy lexicon and a few token
annotations keyed by those ids.

usage: make_mini_fixture.py BUILD_DIR/genreforge [OUT_DIR]
"""

import json
import random
import re
import subprocess
import sys
import tempfile
from pathlib import Path

WORDS = {
    "EN": {
        "noun": "king queen river night heart stone garden window letter city morning "
                "shadow sorrow winter summer forest ocean mountain spirit music".split(),
        "verb": "walked spoke waited listened wandered turned smiled answered "
                "remembered watched".split(),
        "adj": "old silent golden pale gentle dark little bright cold distant".split(),
        "func": "the a of in with under beyond near".split(),
        "names": "HAMLET OPHELIA LAERTES HORATIO".split(),
        "conj": "and but while because".split(),
    },
    "FR": {
        "noun": "roi reine rivière nuit coeur pierre jardin fenêtre lettre ville matin "
                "ombre douleur hiver été forêt mer montagne âme musique".split(),
        "verb": "marchait parlait attendait écoutait errait tournait souriait "
                "répondait regardait pensait".split(),
        "adj": "vieux silencieux doré pâle doux sombre petit clair froid lointain".split(),
        "func": "le la les un une de dans avec sous".split(),
        "names": "ALCESTE CÉLIMÈNE PHILINTE ÉLIANTE".split(),
        "conj": "et mais tandis que parce que".split(),
    },
}

METAPHOR = {
    "EN": ["heart", "stone", "shadow", "ocean", "spirit"],
    "FR": ["coeur", "pierre", "ombre", "âme"],
}

HEADER = ("The Project Gutenberg eBook of {title}\n\n"
          "This eBook is for the use of anyone anywhere.\n\n"
          "*** START OF THE PROJECT GUTENBERG EBOOK {title_upper} ***\n\n")
FOOTER = ("\n\n*** END OF THE PROJECT GUTENBERG EBOOK {title_upper} ***\n\n"
          "Updated editions will replace the previous one.\n")


def phrase(rng, w):
    return f"{rng.choice(w['func'])} {rng.choice(w['adj'])} {rng.choice(w['noun'])}"


def novel_sentence(rng, w):
    clauses = []
    for _ in range(rng.randint(3, 5)):
        clauses.append(f"{phrase(rng, w)} {rng.choice(w['verb'])} {phrase(rng, w)} "
                       f"{rng.choice(w['func'])} {rng.choice(w['noun'])}")
    body = f", {rng.choice(w['conj'])} ".join(clauses)
    return body[0].upper() + body[1:] + "."


def drama_line(rng, w):
    speech = f"{rng.choice(w['verb'])} {phrase(rng, w)}"
    end = rng.choice(["!", "?", "."])
    return f"{rng.choice(w['names'])}. {speech[0].upper() + speech[1:]}{end}"


def poetry_line(rng, w):
    line = f"{rng.choice(w['adj'])} {rng.choice(w['noun'])} {rng.choice(w['func'])} {rng.choice(w['noun'])}"
    return line[0].upper() + line[1:]


def write_corpus(root, rng):
    for lang, w in WORDS.items():
        for genre in ("Drama", "Poetry", "Novel"):
            d = root / "corpus" / lang / genre
            d.mkdir(parents=True, exist_ok=True)
            for doc in range(2):
                title = f"{genre} {lang} {doc + 1}"
                if genre == "Novel":
                    paras = [" ".join(novel_sentence(rng, w) for _ in range(3)) for _ in range(10)]
                    body = "\n\n".join(paras)
                elif genre == "Drama":
                    body = "\n".join(drama_line(rng, w) for _ in range(16))
                else:
                    stanzas = ["\n".join(poetry_line(rng, w) for _ in range(4)) for _ in range(8)]
                    body = "\n\n".join(stanzas)
                text = (HEADER.format(title=title, title_upper=title.upper()) + body +
                        FOOTER.format(title_upper=title.upper()))
                (d / f"{genre.lower()}{doc + 1}.txt").write_text(text, encoding="utf-8")


TOKEN = re.compile(r"\w+(?:'\w+)*")


def conllu(record):
    tokens = TOKEN.findall(record["text"])
    lines = [f"# sent_id = {record['sentence_id']}", f"# text = {record['text']}"]
    # Clause chains: each token hangs off the previous one; a clause restarts
    # at a conjunction and attaches to the first token.
    conj = {"and", "but", "while", "because", "et", "mais", "tandis", "parce"}
    prev = 0
    for i, tok in enumerate(tokens, start=1):
        if i == 1:
            head = 0
        elif tok.lower() in conj:
            head = 1
        else:
            head = prev
        prev = i
        lines.append(f"{i}\t{tok}\t_\t_\t_\t_\t{head}\t{'root' if head == 0 else 'dep'}\t_\t_")
    return "\n".join(lines) + "\n\n"


def main():
    exe = Path(sys.argv[1]).resolve()
    out = Path(sys.argv[2] if len(sys.argv) > 2 else Path(__file__).parent.parent / "tests/fixtures/mini")
    rng = random.Random(20240901)
    write_corpus(out, rng)

    with tempfile.TemporaryDirectory() as tmp:
        manifest = Path(tmp) / "all.jsonl"
        subprocess.run([str(exe), "ingest", "--corpus", str(out / "corpus"), "--out", str(manifest),
                        "--target-per-genre", "1000000"], check=True)
        records = [json.loads(l) for l in manifest.read_text(encoding="utf-8").splitlines() if l]

    parses = out / "parses"
    parses.mkdir(exist_ok=True)
    for lang in WORDS:
        text = "".join(conllu(r) for r in records if r["language"] == lang)
        (parses / f"{lang.lower()}.conllu").write_text(text, encoding="utf-8")

    lemmas = sorted({m for ms in METAPHOR.values() for m in ms})
    (out / "metaphor_lexicon.txt").write_text("\n".join(lemmas) + "\n", encoding="utf-8")

    ann = []
    for r in [r for r in records if r["language"] == "EN"][:20]:
        labels = [1 if t.lower() in METAPHOR["EN"] else 0 for t in TOKEN.findall(r["text"])]
        ann.append(json.dumps({"sentence_id": r["sentence_id"], "labels": labels}))
    (out / "metaphor_annotations.jsonl").write_text("\n".join(ann) + "\n", encoding="utf-8")

    config = {
        "corpus": "corpus",
        "lexicon": "../../../data/lexicon",
        "parses": "parses",
        "metaphor_annotations": "metaphor_annotations.jsonl",
        "metaphor_lexicon": "metaphor_lexicon.txt",
        "output": "out",
        "encoder": {"ngram_range": [2, 4], "dim": 1024, "hash_seed": 0, "normalize": True},
        "train": {"learning_rate": 0.5, "epochs": 20, "batch_size": 16, "l2": 0.0001, "seed": 7},
        "tasks": ["P:N", "N:D"],
        "languages": ["EN", "FR"],
        "kind_sets": ["", "syntax", "metaphor", "metre"],
        "seed": 13,
        "target_per_genre": 40,
        "model_id": "hashed-ngram",
    }
    (out / "pipeline.json").write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")
    print(f"{len(records)} sentences, fixture in {out}")


if __name__ == "__main__":
    main()
