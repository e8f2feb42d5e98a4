"""Collects acceptance sub-checks so one line per criterion can be printed."""
from collections import defaultdict

CRITERIA = range(1, 11)
RESULTS: dict[int, list[tuple[str, bool, str]]] = defaultdict(list)


def record(criterion: int, label: str, ok: bool, detail: str = "") -> bool:
    RESULTS[criterion].append((label, bool(ok), detail))
    return bool(ok)


def summary_lines() -> list[str]:
    lines = []
    for k in CRITERIA:
        checks = RESULTS.get(k)
        if not checks:
            lines.append(f"CRITERION {k}: FAIL (not evaluated)")
            continue
        ok = all(c[1] for c in checks)
        parts = "; ".join(f"{label} {'ok' if good else 'FAILED'} [{detail}]" for label, good, detail in checks)
        lines.append(f"CRITERION {k}: {'PASS' if ok else 'FAIL'} - {parts}")
    return lines
