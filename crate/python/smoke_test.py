"""Smoke test for the qlb Python module.

Uses an installed `qlb` if there is one; otherwise builds the extension with
cargo and loads it from a temporary directory.

    python3 python/smoke_test.py
"""

import importlib
import json
import math
import os
import shutil
import subprocess
import sys
import tempfile
from fractions import Fraction

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def load():
    try:
        return importlib.import_module("qlb")
    except ImportError:
        pass
    subprocess.run(
        ["cargo", "build", "--offline", "-p", "qlb-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    target = os.environ.get("CARGO_TARGET_DIR", os.path.join(ROOT, "target"))
    names = {"linux": "libqlb.so", "darwin": "libqlb.dylib", "win32": "qlb.dll"}
    built = os.path.join(target, "debug", names.get(sys.platform, "libqlb.so"))
    tmp = tempfile.mkdtemp(prefix="qlb-smoke-")
    shutil.copy(built, os.path.join(tmp, "qlb.pyd" if sys.platform == "win32" else "qlb.so"))
    sys.path.insert(0, tmp)
    return importlib.import_module("qlb")


def check(name, cond, detail=""):
    print(("ok   " if cond else "FAIL ") + name + (f"  ({detail})" if detail else ""))
    return bool(cond)


def exact_multiset(spec):
    out = []
    for _, (p, q), mult in spec.exact_entries():
        if p:
            out += [Fraction(p, q)] * mult
    return sorted(out)


def main():
    qlb = load()
    ok = True

    s = qlb.coupon_spectrum(3, 2, 1)
    ok &= check("coupon (3,2,1) exact", exact_multiset(s) == sorted([Fraction(2, 3), Fraction(1, 6), Fraction(1, 6)]))
    matched, dev = s.match_oracle()
    ok &= check("coupon (3,2,1) matches Gram oracle", matched, f"max dev {dev:.1e}")
    ok &= check("pgm 8/9", abs(s.pgm_success() - 8 / 9) < 1e-9)
    hc = s.hc()
    ok &= check("hc 0.94281", abs(hc - 0.94281) < 1e-5, f"{hc:.7f}")
    opt = s.optimal_success()
    ok &= check("hc^2 <= opt <= hc", hc * hc - 1e-8 <= opt <= hc + 1e-8)

    p = qlb.pac_spectrum(2, "1/8", 2)
    want = sorted(Fraction(*x) for x in [(19, 32), (3, 16), (3, 16), (1, 32)])
    ok &= check("pac (2,1/8,2) exact", exact_multiset(p) == want)
    ok &= check("pac float trace", abs(qlb.pac_spectrum(5, "1/5", 4, tower="float").trace() - 1) < 1e-12)

    a = qlb.agnostic_spectrum(3, "1/8", 3)
    ok &= check("agnostic float only", a.exact_entries() is None and a.match_oracle()[0])

    law = [Fraction(n, d) for n, d in qlb.walk_law(9, 5, 7)]
    ok &= check("walk law sums to 1", sum(law) == 1)
    mc = qlb.walk_mc(9, 5, 7, trials=4000, seed=3)
    ok &= check("walk mc is seeded", mc == qlb.walk_mc(9, 5, 7, trials=4000, seed=3))
    ok &= check("walk mc near exact", max(abs(float(x) - y) for x, y in zip(law, mc)) < 0.05)

    r = qlb.verify("walk_identity", "n = 3..6\nt = 10")
    ok &= check("verify walk_identity", r.passed() and r.worst_margin == 0.0, repr(r))
    back = json.loads(r.to_json())
    ok &= check("report json", back["points_checked"] == r.points_checked and back["lemma_id"] == "walk_identity")
    ok &= check("inverted fails", not qlb.verify("walk_identity", "n = 3..6\nt = 10", invert=True).passed())
    try:
        qlb.verify("no_such_lemma")
        ok &= check("unknown lemma raises", False)
    except ValueError:
        ok &= check("unknown lemma raises", True)
    ok &= check("registry", "hc_sandwich" in qlb.checkers() and len(qlb.checkers()) == 17)

    c0 = qlb.bound_value("qcc_c0", {"delta": 0.01})
    ok &= check("qcc_c0", abs(c0 - 0.5 * math.log(0.99 / 0.32)) < 1e-12, f"{c0}")

    gap = json.loads(qlb.gap_demo(0.25, [16, 25], [1.0, 2.0]))
    ok &= check("gap demo", gap["first"]["n"] == 16 and gap["first"]["gamma"] > 7 / 8)

    print("all ok" if ok else "FAILED")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
