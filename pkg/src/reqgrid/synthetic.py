"""Deterministic stand-in corpora with the class supports of the public datasets.

The real PROMISE NFR, Functional-Quality and SecReq files are not
redistributed here. These generators produce files in the canonical layout
with the same row counts and label distributions, and with class-flavoured
wording so that the mock backend yields non-trivial confusion matrices.
"""

from __future__ import annotations

import random
from pathlib import Path

from .corpus import Requirement, write_dataset

PROMISE_SUPPORTS = {
    "Functional": 255,
    "Usability": 67,
    "Security": 66,
    "Operational": 62,
    "Performance": 54,
    "Look & Feel": 38,
    "Availability": 21,
    "Scalability": 21,
    "Maintainability": 17,
    "Legal": 13,
    "Fault Tolerance": 10,
    "Portability": 1,
}

SECREQ_SUPPORTS = {"sec": 187, "nonsec": 323}

# Joint (functional, quality) cell sizes. Marginals: Quality 522 / NonQuality
# 434 and Functional 569 / NonFunctional 387, over 956 rows.
FQ_JOINT = {
    ("Functional", "Quality"): 200,
    ("Functional", "NonQuality"): 369,
    ("NonFunctional", "Quality"): 322,
    ("NonFunctional", "NonQuality"): 65,
}

PHRASES = {
    "Functional": [
        "display the list of open orders",
        "allow the clerk to add a new customer record",
        "generate a monthly sales report",
        "send a notification when a game is scheduled",
        "let the dispatcher assign a drone to a mission",
        "record every payment made by a member",
        "export the selected records to a spreadsheet",
        "provide a search function for archived documents",
    ],
    "Usability": [
        "be easy to learn for a new user",
        "offer an intuitive interface to every user",
        "let users complete common tasks with minimal training",
        "provide context help so the user can learn each screen",
        "support ease of navigation for first-time users",
    ],
    "Security": [
        "only allow authorized staff to access patient data",
        "encrypt all stored passwords",
        "lock an account after three failed password attempts",
        "protect the database against unauthorized access",
        "log every security relevant event",
    ],
    "Operational": [
        "operate in the existing hospital network environment",
        "install on the standard office platform",
        "run on the operational servers used by the county",
        "interface with the current billing environment",
    ],
    "Performance": [
        "return search results within two seconds",
        "keep response time under one second for each request",
        "process a throughput of fifty transactions per second",
        "refresh the map display at high speed",
    ],
    "Look & Feel": [
        "use the corporate color scheme on every page",
        "have a professional look and feel",
        "follow the appearance of the existing web site",
        "present a consistent style across all forms",
    ],
    "Availability": [
        "be available 24 hours a day",
        "achieve an uptime of 99 percent during business hours",
        "limit planned downtime to one hour per month",
    ],
    "Scalability": [
        "scale to ten thousand concurrent sessions",
        "handle a growth of the load by a factor of ten",
        "support concurrent use by every regional office",
    ],
    "Maintainability": [
        "be modular so that each component can be modified separately",
        "allow an administrator to update the rules without new code",
        "be easy to maintain by the support team",
    ],
    "Legal": [
        "comply with the national data protection law",
        "follow the regulation on electronic records",
        "meet the compliance policy of the university",
    ],
    "Fault Tolerance": [
        "recover from a server failure without losing data",
        "keep a backup copy of every transaction",
        "continue working when one fault occurs in the network",
    ],
    "Portability": [
        "be portable to other platforms with little effort",
    ],
    "Context": [
        "The project glossary lists every domain term",
        "This section describes the scope of the release",
        "The customer is the regional transport authority",
        "Chapter three summarizes the stakeholder interviews",
    ],
}

ACTORS = ["system", "product", "application", "software", "service"]
QUALITY_CLASSES = [c for c in PROMISE_SUPPORTS if c not in ("Functional", "Portability")]


def _sentence(rng: random.Random, main: str, noise_pool=None, noise_rate=0.3) -> str:
    actor = rng.choice(ACTORS)
    clause = rng.choice(PHRASES[main])
    if noise_pool and rng.random() < noise_rate:
        clause = f"{clause} and {rng.choice(PHRASES[rng.choice(noise_pool)])}"
    if rng.random() < 0.2:
        clause = clause.replace(" ", ", ", 1) if rng.random() < 0.5 else f"{clause} (where applicable)"
    text = f"The {actor} shall {clause}"
    return text if rng.random() < 0.3 else text + "."


def _context_sentence(rng: random.Random) -> str:
    text = rng.choice(PHRASES["Context"])
    return text if rng.random() < 0.5 else text + "."


def _shuffled(labels: dict, rng: random.Random) -> list:
    seq = [label for label, n in labels.items() for _ in range(n)]
    rng.shuffle(seq)
    return seq


def promise_corpus(seed: int = 0) -> list[Requirement]:
    rng = random.Random(seed)
    out = []
    for i, label in enumerate(_shuffled(PROMISE_SUPPORTS, rng), start=1):
        text = _sentence(rng, label, noise_pool=list(PHRASES.keys())[:-1])
        out.append(Requirement(f"P{i:04d}", f"promise-{1 + i % 15}", text, {"promise": label}))
    return out


def secreq_corpus(seed: int = 0) -> list[Requirement]:
    rng = random.Random(seed + 1)
    projects = ["ePurse", "CPN", "GPS"]
    out = []
    for i, label in enumerate(_shuffled(SECREQ_SUPPORTS, rng), start=1):
        if label == "sec":
            text = _sentence(rng, "Security", noise_pool=["Functional"], noise_rate=0.4)
        else:
            main = rng.choice(["Functional"] * 3 + QUALITY_CLASSES)
            if main == "Security":
                main = "Functional"
            text = _sentence(rng, main, noise_pool=["Security"], noise_rate=0.15)
        out.append(Requirement(f"S{i:04d}", projects[i % 3], text, {"secreq": label}))
    return out


def functional_quality_corpus(seed: int = 0) -> list[Requirement]:
    rng = random.Random(seed + 2)
    projects = ["PROMISE", "Dronology", "Wasp", "Leeds", "ReqView"]
    seq = [pair for pair, n in FQ_JOINT.items() for _ in range(n)]
    rng.shuffle(seq)
    out = []
    for i, (f, q) in enumerate(seq, start=1):
        if f == "Functional" and q == "Quality":
            text = _sentence(rng, "Functional", noise_pool=QUALITY_CLASSES, noise_rate=1.0)
        elif f == "Functional":
            text = _sentence(rng, "Functional", noise_pool=QUALITY_CLASSES, noise_rate=0.1)
        elif q == "Quality":
            text = _sentence(rng, rng.choice(QUALITY_CLASSES), noise_pool=["Functional"], noise_rate=0.1)
        else:
            text = _context_sentence(rng)
        out.append(Requirement(f"F{i:04d}", projects[i % 5], text, {"functional": f, "quality": q}))
    return out


def write_synthetic_corpora(out_dir, seed: int = 0) -> dict[str, Path]:
    """Write the three canonical files and return their paths keyed by dataset name."""
    out_dir = Path(out_dir)
    paths = {
        "promise": out_dir / "promise.csv",
        "functional_quality": out_dir / "functional_quality.csv",
        "secreq": out_dir / "secreq.csv",
    }
    write_dataset(paths["promise"], promise_corpus(seed), ["promise"])
    write_dataset(paths["functional_quality"], functional_quality_corpus(seed), ["functional", "quality"])
    write_dataset(paths["secreq"], secreq_corpus(seed), ["secreq"])
    return paths
