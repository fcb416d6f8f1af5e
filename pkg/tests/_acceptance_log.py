"""Shared sink for acceptance-criterion results, printed at session end."""

RESULTS: list[str] = []


def record(line: str) -> None:
    RESULTS.append(line)
