"""Collects one verdict line per acceptance criterion for the terminal summary."""

LINES: list[str] = []


def verdict(cid: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  {cid}  {detail}"
    LINES.append(line)
    print(line)
    assert ok, line
