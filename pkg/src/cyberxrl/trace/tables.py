"""Fixed-width text rendering of the attacker's view of the network."""

from __future__ import annotations

COLUMNS = ("id", "status", "properties", "local_attacks", "remote_attacks")
HIDDEN = "--"


def _cell(values, hidden=False):
    if hidden or values is None:
        return HIDDEN
    return "[" + ", ".join(values) + "]"


def state_table_rows(observation):
    rows = []
    for r in observation.rows:
        discovered_only = r.status != "owned"
        rows.append((
            r.id,
            r.status,
            _cell(r.properties, discovered_only),
            _cell(r.local_attacks, discovered_only),
            _cell(r.remote_attacks),
        ))
    return rows


def render_state_table(observation):
    """One line per visible node; owned rows come first, each group sorted by id."""
    rows = state_table_rows(observation)
    widths = [max([len(c)] + [len(row[i]) for row in rows]) for i, c in enumerate(COLUMNS)]

    def line(cells):
        return "  ".join(cell.ljust(w) for cell, w in zip(cells, widths)).rstrip()

    out = [line(COLUMNS), line(["-" * w for w in widths])]
    out.extend(line(row) for row in rows)
    return "\n".join(out) + "\n"
