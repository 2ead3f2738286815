"""Action ladders: the fixed, indexed abstract action sets of each environment family."""

from __future__ import annotations

from dataclasses import dataclass

LOCAL = "Local"
REMOTE = "Remote"
CONNECT = "Connect"
KINDS = (LOCAL, REMOTE, CONNECT)


@dataclass(frozen=True, order=True)
class ActionSpec:
    index: int
    kind: str
    name: str

    @property
    def service(self):
        """Service name targeted by a connect action, e.g. ``"SSH"``; ``None`` otherwise."""
        if self.kind != CONNECT:
            return None
        return self.name[len("connect("):-1]


def _ladder(entries):
    out = []
    for i, name in enumerate(entries, start=1):
        prefix = name.split("(", 1)[0]
        kind = {"local": LOCAL, "remote": REMOTE, "connect": CONNECT}[prefix]
        out.append(ActionSpec(i, kind, name))
    return tuple(out)


CHAIN_LADDER = _ladder([
    "local(CrackKeePassX)",
    "remote(ProbeLinux)",
    "local(ScanBashHistory)",
    "remote(ProbeWindows)",
    "local(CrackKeePass)",
    "connect(SSH)",
    "connect(RDP)",
    "connect(SSH-key)",
    "connect(MySQL)",
    "connect(HTTPS)",
    "connect(GIT)",
    "connect(PING)",
    "local(ScanExplorerRecentFiles)",
    "local(SudoAttempt)",
    "connect(su)",
])

CTF_LADDER = _ladder([
    "local(ScanBashHistory)",
    "local(ScanExplorerRecentFiles)",
    "local(SudoAttempt)",
    "local(ExfiltrateFlag)",
    "local(CrackKeePassX)",
    "remote(ProbeLinux)",
    "remote(ProbeWindows)",
    "remote(ProbeSQLServer)",
    "connect(HTTPS)",
    "connect(GIT)",
    "connect(SSH)",
    "connect(RDP)",
    "connect(MySQL)",
    "connect(SSH-key)",
    "connect(PING)",
    "connect(su)",
    "remote(ProbeFlagServer)",
    "local(CrackKeePass)",
])

LADDERS = {"chain": CHAIN_LADDER, "ctf": CTF_LADDER}


def ladder_index(ladder, name):
    for spec in ladder:
        if spec.name == name:
            return spec.index
    raise KeyError(name)
