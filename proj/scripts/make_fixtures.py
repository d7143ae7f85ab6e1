#!/usr/bin/env python3
"""Regenerates the shipped fixtures under data/.

    python3 scripts/make_fixtures.py [--bank-tables FILE]

The per-game model banks are parsed from the LaTeX tables in FILE; without it
the existing data/banks/ files are left alone.
"""

import argparse
import json
import math
import re
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"

NORMS = """\
Alien,227.75,7127.7
Amidar,5.77,1719.5
Assault,222.39,742.0
Asterix,210.0,8503.3
Asteroids,719.1,47388.7
Atlantis,12850.0,29028.1
Bank Heist,14.2,753.1
Battle Zone,2360.0,37187.5
Beam Rider,363.88,16926.5
Berzerk,123.65,2630.4
Bowling,23.11,160.7
Boxing,0.05,12.1
Breakout,1.72,30.5
Centipede,2090.87,12017.0
Chopper Command,811.0,7387.8
Crazy Climber,10780.5,35829.4
Defender,2874.5,18688.9
Demon Attack,152.07,1971.0
Double Dunk,-18.55,-16.4
Enduro,0.0,860.5
Fishing Derby,-91.71,-38.7
Freeway,0.01,29.6
Frostbite,65.2,4334.7
Gopher,257.6,2412.5
Gravitar,173.0,3351.4
Hero,1026.97,30826.4
Ice Hockey,-11.15,0.9
James Bond,29.0,302.8
Kangaroo,52.0,3035.0
Krull,1598.05,2665.5
Kung Fu Master,258.5,22736.3
Montezuma Revenge,0.0,4753.3
Ms Pacman,307.3,6951.6
Name This Game,2292.35,8049.0
Phoenix,761.4,7242.6
Pitfall,-229.44,6463.7
Pong,-20.71,14.6
Private Eye,24.94,69571.3
Qbert,163.88,13455.0
Riverraid,1338.5,17118.0
Road Runner,11.5,7845.0
Robotank,2.16,11.9
Seaquest,68.4,42054.7
Skiing,-17098.09,-4336.9
Solaris,1236.3,12326.7
Space Invaders,148.3,1668.7
Star Gunner,664.0,10250.0
Surround,-9.99,6.53
Tennis,-23.84,-8.3
Time Pilot,3568.0,5229.2
Tutankham,11.43,167.6
Up n Down,533.4,11693.2
Venture,0.0,1187.5
Video Pinball,0.0,17667.9
Wizard of Wor,563.5,4756.5
Yars Revenge,3092.91,54576.9
Zaxxon,32.5,9173.3
"""

CATEGORIES = {
    "shooter": ["Assault", "Asteroids", "Atlantis", "Beam Rider", "Centipede", "Chopper Command", "Defender",
                "Demon Attack", "Gravitar", "Phoenix", "Space Invaders", "Star Gunner", "Time Pilot",
                "Yars Revenge", "Zaxxon", "Riverraid", "Robotank", "Battle Zone", "Name This Game", "Solaris",
                "Seaquest"],
    "maze": ["Alien", "Amidar", "Bank Heist", "Berzerk", "Ms Pacman", "Wizard of Wor", "Venture", "Tutankham"],
    "platform": ["Frostbite", "Hero", "Kangaroo", "Montezuma Revenge", "Pitfall", "Private Eye", "Qbert",
                 "Crazy Climber", "James Bond", "Krull", "Road Runner", "Asterix", "Up n Down", "Gopher"],
    "sports": ["Bowling", "Boxing", "Double Dunk", "Fishing Derby", "Ice Hockey", "Pong", "Skiing", "Tennis",
               "Surround", "Kung Fu Master"],
    "racing": ["Enduro", "Freeway"],
    "paddle": ["Breakout", "Video Pinball"],
}

SUBSET_MODELS = {
    "atari-1": (["Name This Game"], [0.9976], 0.864, 0.274),
    "atari-3": (["Battle Zone", "Name This Game", "Phoenix"], [0.3706, 0.5133, 0.1015], 0.976, 0.137),
    "atari-5": (["Battle Zone", "Double Dunk", "Name This Game", "Phoenix", "Qbert"],
                [0.3820, 0.0679, 0.3108, 0.1241, 0.0805], 0.984, 0.104),
    "atari-10": (["Amidar", "Bowling", "Frostbite", "Kung Fu Master", "Riverraid", "Battle Zone", "Double Dunk",
                  "Name This Game", "Phoenix", "Qbert"],
                 [0.0825, 0.0559, 0.0691, 0.0986, 0.0486, 0.1888, 0.0852, 0.1287, 0.1643, 0.0592], 0.992, 0.072),
    "atari-3-val": (["Assault", "Ms Pacman", "Yars Revenge"], [0.3353, 0.4236, 0.1916], 0.952, 0.171),
    "atari-5-val": (["Bank Heist", "Video Pinball", "Assault", "Ms Pacman", "Yars Revenge"],
                    [0.1072, 0.0959, 0.2234, 0.2943, 0.2239], 0.972, 0.143),
}

REFERENCE_SUBSETS = {
    "dqn-7": ["Beam Rider", "Breakout", "Enduro", "Pong", "Qbert", "Seaquest", "Space Invaders"],
    "a3c-5": ["Beam Rider", "Breakout", "Pong", "Qbert", "Space Invaders"],
    "hard-exploration-7": ["Freeway", "Gravitar", "Montezuma Revenge", "Pitfall", "Private Eye", "Solaris",
                           "Venture"],
    "hard-exploration-3": ["Montezuma Revenge", "Pitfall", "Private Eye"],
}

CASE_STUDY = [
    # algorithm, median, subset prediction, rel. error %, rebased median, rebased prediction, rebased rel. error %
    ("C51", 109, 96, 12.6, 0.74, 0.81, 9.0),
    ("IQN", 129, 95, 26.0, 0.87, 0.81, 7.7),
    ("C2D", 133, 111, 17.0, 0.90, 0.94, 3.5),
    ("Rainbow", 147, 118, 19.8, 1.00, 1.00, 0.0),
]

DEMO_GAMES = ["Alien", "Amidar", "Assault", "Bank Heist", "Battle Zone", "Beam Rider", "Bowling", "Breakout",
              "Double Dunk", "Enduro", "Frostbite", "Kung Fu Master", "Ms Pacman", "Name This Game", "Phoenix",
              "Pong", "Qbert", "Riverraid", "Seaquest", "Yars Revenge"]


def fnv1a64(text: str) -> str:
    h = 0xCBF29CE484222325
    for b in text.encode("utf-8"):
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return f"{h:016x}"


def key(name: str) -> str:
    return re.sub(r"[^a-z0-9]", "", name.lower())


def latex_table_rows(text: str, label: str):
    start = text.index(label)
    body = text[start:text.index("\\bottomrule", start)]
    rows = []
    for line in body.splitlines():
        cells = [c.strip() for c in line.replace("\\\\", "").split("&")]
        if len(cells) < 3 or cells[0] in ("Game",):
            continue
        try:
            values = [float(c) for c in cells[1:]]
        except ValueError:
            continue
        rows.append((cells[0], values))
    return rows


def write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--bank-tables", type=Path, help="document holding the per-game model tables")
    args = parser.parse_args()

    norms_text = "environment,random,human\n" + NORMS
    write(DATA / "normalization.csv", norms_text)
    checksum = fnv1a64(norms_text)
    norms = {}
    for line in NORMS.splitlines():
        name, r, h = line.split(",")
        norms[key(name)] = (name, float(r), float(h))

    cat_lines = ["environment,category"]
    for cat, games in CATEGORIES.items():
        for g in games:
            assert key(g) in norms, g
            cat_lines.append(f"{g},{cat}")
    assert len(cat_lines) - 1 == 57
    write(DATA / "categories.csv", "\n".join(sorted(cat_lines[1:], key=str.lower)).join([cat_lines[0] + "\n", "\n"]))

    for name, (games, coefs, r2, rel) in SUBSET_MODELS.items():
        doc = {
            "format": "benchsel.linear_model/1",
            "name": name,
            "environment_ids": games,
            "coefficients": coefs,
            "intercept": None,
            "constrained_nonnegative": False,
            "stats": {"r_squared": r2, "n_observations": 0, "cv_mse": None, "log_mae": rel / math.log(10)},
            "norms_checksum": checksum,
        }
        write(DATA / "models" / f"{name}.json", json.dumps(doc, indent=2) + "\n")

    tables = args.bank_tables.read_text() if args.bank_tables else None
    for label, subset_name, fname in (("Atari-5 linear regression models", "atari-5", "atari5_bank.json"),
                                      ("Atari-10 linear regression models", "atari-10", "atari10_bank.json")):
        if tables is None:
            break
        subset = SUBSET_MODELS[subset_name][0]
        members = {key(g) for g in subset}
        rows = latex_table_rows(tables, label)
        assert len(rows) == 57, (label, len(rows))
        models = []
        for game, values in rows:
            env = norms[key(game)][0]
            assert len(values) == len(subset) + 1
            models.append({
                "environment": env,
                "identity": key(env) in members,
                "n_used": 0,
                "usable": True,
                "intercept": values[0],
                "coefficients": values[1:],
            })
        doc = {"format": "benchsel.model_bank/1", "name": subset_name + "-bank", "subset": subset,
               "norms_checksum": checksum, "models": models}
        write(DATA / "banks" / fname, json.dumps(doc, indent=2) + "\n")

    write(DATA / "reference_subsets.json", json.dumps({"subsets": REFERENCE_SUBSETS}, indent=2) + "\n")

    lines = ["algorithm,median,predicted,rel_error_pct,rebased_median,rebased_predicted,rebased_rel_error_pct"]
    for row in CASE_STUDY:
        lines.append(",".join(str(v) for v in row))
    write(DATA / "case_study.csv", "\n".join(lines) + "\n")

    make_demo(norms)


def make_demo(norms):
    rng = np.random.default_rng(20220901)
    n_alg, games = 48, DEMO_GAMES
    loading = rng.uniform(0.6, 1.3, len(games))
    offset = rng.normal(0.0, 0.3, len(games))
    skill = rng.normal(1.9, 0.45, n_alg + 6)
    logs = np.maximum(0.0, offset + np.outer(skill, loading) + rng.normal(0.0, 0.15, (n_alg + 6, len(games))))
    z = 10.0 ** logs - 1.0

    def raw(i, j):
        _, r, h = norms[key(games[j])]
        return r + (h - r) * z[i, j] / 100.0

    header = "algorithm," + ",".join(games)
    rows = [header]
    for i in range(n_alg):
        cells = []
        for j in range(len(games)):
            cells.append("" if rng.random() < 0.04 else f"{raw(i, j):.6g}")
        rows.append(f"demo-{i + 1:02d}," + ",".join(cells))
    write(DATA / "demo" / "scores.csv", "\n".join(rows) + "\n")

    rows = [header + ",true_median"]
    for i in range(n_alg, n_alg + 6):
        cells = [f"{raw(i, j):.6g}" for j in range(len(games))]
        rows.append(f"holdout-{i - n_alg + 1}," + ",".join(cells) + f",{float(np.median(z[i])):.6g}")
    write(DATA / "demo" / "holdout.csv", "\n".join(rows) + "\n")


if __name__ == "__main__":
    main()
