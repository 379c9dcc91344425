"""Freeze the server-side tokenize/snap behavior into a JSON fixture that
the browser client's contract test replays.

Run from the repo root:
    python3 scripts/make_snapping_fixture.py
"""

import json
from pathlib import Path

import numpy as np

from errspan.model import CharSpan
from errspan.textproc import SnapEmptyError, snap_to_word_boundaries, tokenize

CORPUS = (
    'The miller said, "Take the old road." He didn\'t wait -- the rain kept '
    "falling (heavily, in fact) on the well-known bridge.  Dr. Lane counted "
    "3.5 bags of grain; the total, she wrote, was $12.40!? “Remarkable,” "
    "said the café's owner… then:\n\ttwo boats, three nets, and one "
    "very old mill-wheel.   Spaces --- and em—dashes — stay tricky. "
    "[See notes.] End."
)


def main() -> None:
    tm = tokenize(CORPUS)
    rng = np.random.default_rng(1234)
    cases = []
    n = len(CORPUS)
    while len(cases) < 100:
        start = int(rng.integers(0, n))
        end = int(rng.integers(start + 1, n + 1))
        raw = CharSpan(start, end)
        try:
            snapped = snap_to_word_boundaries(raw, tm)
            result = [snapped.start, snapped.end]
        except SnapEmptyError:
            result = None
        cases.append({"start": start, "end": end, "snapped": result})
    out = {
        "text": CORPUS,
        "tokens": [[t.start, t.end] for t in tm.tokens],
        "cases": cases,
    }
    dest = Path(__file__).parent.parent / "frontend" / "tests" / "fixtures" / "snapping.json"
    dest.parent.mkdir(parents=True, exist_ok=True)
    dest.write_text(json.dumps(out, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {dest} ({len(cases)} cases, {len(tm.tokens)} tokens)")


if __name__ == "__main__":
    main()
