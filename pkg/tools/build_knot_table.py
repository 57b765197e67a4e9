"""Regenerate the bundled knot table and the KnotInfo homology fixtures.

Needs the ``database_knotinfo`` package (KnotInfo CSV export); it is only used
here, never at runtime.

    python tools/build_knot_table.py
"""

import json
import re
from pathlib import Path

from database_knotinfo import link_list

ROOT = Path(__file__).resolve().parents[1]
TABLE = ROOT / "src" / "oddkh" / "data" / "knots.json"
FIXTURE = ROOT / "tests" / "data" / "knotinfo_khovanov.json"

# Stored mirrored so the table agrees with the chirality of the published
# odd Khovanov tables (Rolfsen / Knot Atlas pictures).
MIRRORED = {"10_152", "10_161"}


def wanted(name):
    m = re.fullmatch(r"(\d+)_(\d+)", name)
    if m:
        return int(m.group(1)) <= 10
    return re.fullmatch(r"11n_\d+", name) is not None


def mirror_pd(pd):
    return [[a, d, c, b] for a, b, c, d in pd]


def jones_t_to_q(text, mirror):
    """KnotInfo writes V(t); the q-normalised Jones polynomial is V(q^2)."""
    text = text.replace(" ", "")
    terms = {}
    for sign, coeff, var, exp in re.findall(
        r"([+-]?)(\d*)\*?(t?)(?:\^\(?(-?\d+)\)?)?", text
    ):
        if not (coeff or var):
            continue
        c = int(coeff) if coeff else 1
        if sign == "-":
            c = -c
        e = int(exp) if exp else (1 if var else 0)
        e = 2 * e * (-1 if mirror else 1)
        terms[e] = terms.get(e, 0) + c
    out = []
    for e in sorted(terms):
        c = terms[e]
        if not c:
            continue
        mono = f"q^{e}" if e else ""
        if not mono:
            out.append(str(c))
        elif abs(c) == 1:
            out.append(("-" if c < 0 else "") + mono)
        else:
            out.append(f"{c}*{mono}")
    return " + ".join(out).replace("+ -", "- ")


def homology_vector(text, mirror):
    """KnotInfo vectors are [torsion, multiplicity, t, q]; torsion 0 means Z."""
    rows = json.loads(text)
    out = []
    for tors, mult, t, q in rows:
        if mirror:
            # H_{m,s}(mirror) = free part at (-m,-s) and torsion shifted by
            # one homological degree (universal coefficients for duals).
            if tors:
                out.append([tors, mult, -t + 1, -q])
            else:
                out.append([0, mult, -t, -q])
        else:
            out.append([tors, mult, t, q])
    return sorted(out, key=lambda r: (r[2], r[3], r[0]))


def main():
    records = []
    fixtures = {}
    for row in link_list()[1:]:
        name = row["name"]
        if not wanted(name):
            continue
        mirror = name in MIRRORED
        if name == "0_1":
            pd, loops = [], 1
        else:
            pd, loops = json.loads(row["pd_notation"]), 0
            if mirror:
                pd = mirror_pd(pd)
        sig = -int(row["signature"])
        if mirror:
            sig = -sig
        rec = {
            "name": name,
            "pd": pd,
            "signature": sig,
            "jones": jones_t_to_q(row["jones_polynomial"], mirror),
            "alternating": row["alternating"] == "Y",
            "source": "KnotInfo" + (" (mirrored)" if mirror else ""),
        }
        if loops:
            rec["loops"] = loops
        records.append(rec)
        if pd and row["khovanov_odd_integral_vector"]:
            fixtures[name] = {
                "odd_reduced_Z": homology_vector(row["khovanov_odd_integral_vector"], mirror),
                "even_unreduced_Z": homology_vector(row["khovanov_unreduced_integral_vector"], mirror),
                "even_reduced_Z": homology_vector(row["khovanov_reduced_integral_vector"], mirror),
            }
    TABLE.write_text(json.dumps(records, indent=0).replace("\n", "") .replace("},{", "},\n{") + "\n")
    FIXTURE.write_text(json.dumps(fixtures, sort_keys=True).replace("], \"", "],\n\"") + "\n")
    print(f"{len(records)} knots -> {TABLE}")
    print(f"{len(fixtures)} homology fixtures -> {FIXTURE}")


if __name__ == "__main__":
    main()
