# Copyright 2026 The crowdbench Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes the synthetic sample corpora, embeddings and configs in samples/.

Every response is tied to one of AXES themes. Its embedding is the unit basis
vector of that theme, its text reuses the theme vocabulary and its bucket is
the theme index, so kernel values within a theme are 1 and across themes are
0.5 (semantic) or small (lexical). Human themes are uniform; model sources
concentrate mass on theme 0 by a per-protocol amount.

Expected semantic crowding for theme weights w is sum(w^2) + (1 - sum(w^2))/2.
"""

import json
import pathlib
import random

AXES = 8
THEMES = [
    ("battery", "charge", "power", "lasting", "energy"),
    ("camera", "photo", "lens", "picture", "zoom"),
    ("design", "sleek", "style", "shape", "elegant"),
    ("speed", "fast", "instant", "quick", "rapid"),
    ("price", "value", "budget", "saving", "cheap"),
    ("music", "sound", "song", "audio", "rhythm"),
    ("travel", "journey", "road", "explore", "map"),
    ("family", "home", "together", "friends", "love"),
]
FILLER = ("the", "your", "a", "for", "with", "every", "and", "our", "new")

CONDITIONS = [
    ("slogans", "smartphone"),
    ("slogans", "coffee"),
    ("aut", "brick"),
    ("stories", "lighthouse"),
]

# protocol label -> weight on theme 0 (remaining mass uniform on the rest)
MODEL_A = {None: 0.55, "persona": 0.15, "t0.7": 0.65, "t1.3": 0.45}


def weights(top):
    rest = (1.0 - top) / (AXES - 1)
    return [top] + [rest] * (AXES - 1)


def expected_kappa(w):
    s = sum(x * x for x in w)
    return s + (1.0 - s) * 0.5


def draw_axis(rng, w):
    return rng.choices(range(AXES), weights=w)[0]


def make_text(rng, axis):
    words = list(THEMES[axis])
    rng.shuffle(words)
    picked = words[:3]
    return " ".join(
        [rng.choice(FILLER), picked[0], rng.choice(FILLER), picked[1], picked[2]]
    ).capitalize() + "."


def record(rid, source, family, cond, axis, text, participant=None,
           protocol=None):
    rec = {
        "id": rid,
        "source": source,
        "task_family": family,
        "condition": cond,
        "text": text,
        "bucket": axis,
    }
    if participant is not None:
        rec["participant"] = participant
    if protocol is not None:
        rec["protocol"] = protocol
    if family == "stories":
        rec["synopsis"] = "A story about " + THEMES[axis][0] + "."
    return rec


def main():
    root = pathlib.Path(__file__).resolve().parent.parent / "samples"
    root.mkdir(exist_ok=True)
    rng = random.Random(20260417)
    humans, models, vectors = [], [], []

    def vector_for(rid, axis, family):
        v = [0.0] * AXES
        v[axis] = 1.0
        vectors.append({"id": rid, "vector": v})
        if family == "stories":
            vectors.append({"id": rid + "#synopsis", "vector": v})

    uniform = [1.0 / AXES] * AXES
    for family, cond in CONDITIONS:
        for p in range(40):
            for k in range(1 + (p % 3 == 0)):
                axis = draw_axis(rng, uniform)
                rid = f"h-{cond}-{p:02d}-{k}"
                humans.append(record(rid, "human", family, cond, axis,
                                     make_text(rng, axis), f"p{p:02d}"))
                vector_for(rid, axis, family)
        for protocol, top in MODEL_A.items():
            tag = protocol or "main"
            for g in range(50):
                axis = draw_axis(rng, weights(top))
                rid = f"a-{tag}-{cond}-{g:02d}"
                models.append(record(rid, "model-a", family, cond, axis,
                                     make_text(rng, axis), protocol=protocol))
                vector_for(rid, axis, family)
        for g in range(50):
            axis = draw_axis(rng, uniform)
            rid = f"b-{cond}-{g:02d}"
            models.append(record(rid, "model-b", family, cond, axis,
                                 make_text(rng, axis)))
            vector_for(rid, axis, family)

    def dump(name, rows):
        with open(root / name, "w", encoding="utf-8") as f:
            for r in rows:
                f.write(json.dumps(r, sort_keys=True) + "\n")

    dump("humans.jsonl", humans)
    dump("models.jsonl", models)
    dump("embeddings.jsonl",
         [{"meta": {"dim": AXES, "model": "synthetic-axes"}}] + vectors)

    config = {
        "human": "humans.jsonl",
        "models": ["models.jsonl"],
        "embeddings": "embeddings.jsonl",
        "kernels": ["semantic"],
        "estimator": {"replicates": 1000, "ci_level": 0.95, "seed": 7},
        "rarefaction": {"repeats": 200},
        "adoption": {"gamma": 1.0, "exposures": [1, 5, 10, 25]},
        "compare": {
            "baseline": "",
            "variant": "persona",
            "sweep": [
                {"protocol": "t0.7", "value": 0.7},
                {"protocol": "", "value": 1.0},
                {"protocol": "t1.3", "value": 1.3},
            ],
        },
        "output": {"dir": "out", "formats": ["csv", "markdown", "svg"]},
    }
    (root / "config.json").write_text(json.dumps(config, indent=2) + "\n")

    all_kernels = dict(config)
    all_kernels["kernels"] = [
        "semantic",
        {"kind": "plot_synopsis", "families": ["stories"]},
        {"kind": "word_jaccard", "families": ["slogans"]},
        {"kind": "char_trigram_jaccard", "families": ["slogans"]},
        {"kind": "bucket", "families": ["aut"]},
    ]
    all_kernels["estimator"] = {"replicates": 200, "ci_level": 0.95, "seed": 7}
    all_kernels["output"] = {"dir": "out-kernels", "formats": ["csv"]}
    del all_kernels["compare"]
    (root / "config_kernels.json").write_text(
        json.dumps(all_kernels, indent=2) + "\n")

    table_rows = [
        ("GPT-5.4", "stories", 0.186), ("Claude Sonnet 4.5", "stories", 0.151),
        ("Gemini 2.5 Flash", "stories", 0.164), ("GPT-5.4", "aut", 0.190),
        ("Claude Sonnet 4.5", "aut", 0.275), ("Gemini 2.5 Flash", "aut", 0.142),
        ("GPT-5.4", "slogans", 0.331), ("Claude Sonnet 4.5", "slogans", 0.132),
        ("Gemini 2.5 Flash", "slogans", 0.136),
    ]
    adoption = {
        "adoption": {
            "gamma": 1.0,
            "exposures": [1, 5, 10, 25],
            "populations": [5, 50, 500],
            "probabilities": [0.1, 0.5, 0.9, 1.0],
            "rows": [{"model": m, "task": t, "delta": d}
                     for m, t, d in table_rows],
        },
        "output": {"dir": "out-adoption", "formats": ["csv", "markdown", "svg"]},
    }
    (root / "adoption.json").write_text(json.dumps(adoption, indent=2) + "\n")

    print("human E[K] =", expected_kappa(uniform))
    for protocol, top in MODEL_A.items():
        print("model-a", protocol or "main", "E[K] =",
              round(expected_kappa(weights(top)), 6))


if __name__ == "__main__":
    main()
