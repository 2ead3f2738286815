"""Attack-graph topologies: node templates, the chain and CTF builders, and the
canonical JSON serialization used by ``generate-env``/``train``/``replay``."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidArgument
from .actions import LADDERS, ladder_index

LINUX, WINDOWS, OTHER = "Linux", "Windows", "Other"
SCHEMA = "cyberxrl.topology/1"

# Reward units. Only the 10/100 asymmetry is anchored in the source material;
# trap and probe magnitudes are configuration.
WORKSTATION_VALUE = 10
FLAG_VALUE = 100
TRAP_VALUE = -10


@dataclass(frozen=True, order=True)
class Credential:
    id: str
    target: str
    service: str


@dataclass(frozen=True)
class Vulnerability:
    """Outcome of a successful local or remote action against one node."""
    label: str
    index: int
    reveals: tuple = ()
    leaks: tuple = ()
    properties: tuple = ()


@dataclass(frozen=True)
class NodeTemplate:
    id: str
    os: str = OTHER
    value: int = 0
    is_trap: bool = False
    flag: bool = False
    exploitable: bool = True
    properties: tuple = ()
    services: tuple = ()
    local_vulns: dict = field(default_factory=dict)
    remote_vulns: dict = field(default_factory=dict)

    @property
    def leaks(self):
        out = []
        for vuln in list(self.local_vulns.values()) + list(self.remote_vulns.values()):
            out.extend(vuln.leaks)
        return out


@dataclass
class NetworkTopology:
    name: str
    family: str
    nodes: dict
    edges: frozenset
    entry: str
    seed: int = 0

    def __post_init__(self):
        if self.family not in LADDERS:
            raise InvalidArgument(f"unknown topology family {self.family!r}")
        if self.entry not in self.nodes:
            raise InvalidArgument(f"entry node {self.entry!r} not in topology")
        for a, b in self.edges:
            if a not in self.nodes or b not in self.nodes:
                raise InvalidArgument(f"edge {a!r}->{b!r} references unknown node")
        self._succ = {n: set() for n in self.nodes}
        for a, b in self.edges:
            self._succ[a].add(b)
        creds = {}
        for node in self.nodes.values():
            for cred in node.leaks:
                creds[cred.id] = cred
        self.credentials = tuple(sorted(creds.values()))

    @property
    def ladder(self):
        return LADDERS[self.family]

    @property
    def size(self):
        return sum(1 for n in self.nodes.values() if n.exploitable and not n.is_trap)

    @property
    def max_nodes(self):
        return len(self.nodes)

    def successors(self, node_id):
        return self._succ[node_id]

    def spec(self, index):
        if not 1 <= index <= len(self.ladder):
            raise InvalidArgument(f"action index {index} outside ladder 1..{len(self.ladder)}")
        return self.ladder[index - 1]

    def to_dict(self):
        return {
            "schema": SCHEMA,
            "name": self.name,
            "family": self.family,
            "seed": self.seed,
            "entry": self.entry,
            "nodes": [_node_to_dict(n) for n in self.nodes.values()],
            "edges": sorted([a, b] for a, b in self.edges),
        }

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def digest(self):
        return hashlib.sha256(self.dumps().encode()).hexdigest()

    def __eq__(self, other):
        return isinstance(other, NetworkTopology) and self.to_dict() == other.to_dict()


def _vuln_to_dict(v):
    return {
        "index": v.index,
        "label": v.label,
        "reveals": list(v.reveals),
        "leaks": [{"id": c.id, "target": c.target, "service": c.service} for c in v.leaks],
        "properties": list(v.properties),
    }


def _node_to_dict(n):
    return {
        "id": n.id,
        "os": n.os,
        "value": n.value,
        "is_trap": n.is_trap,
        "flag": n.flag,
        "exploitable": n.exploitable,
        "properties": list(n.properties),
        "services": list(n.services),
        "local_vulns": [_vuln_to_dict(v) for _, v in sorted(n.local_vulns.items())],
        "remote_vulns": [_vuln_to_dict(v) for _, v in sorted(n.remote_vulns.items())],
    }


def _vuln_from_dict(d):
    return Vulnerability(
        label=d["label"],
        index=int(d["index"]),
        reveals=tuple(d.get("reveals", ())),
        leaks=tuple(Credential(c["id"], c["target"], c["service"]) for c in d.get("leaks", ())),
        properties=tuple(d.get("properties", ())),
    )


def from_dict(data):
    if data.get("schema") != SCHEMA:
        raise InvalidArgument(f"unsupported topology schema {data.get('schema')!r}")
    nodes = {}
    for nd in data["nodes"]:
        nodes[nd["id"]] = NodeTemplate(
            id=nd["id"],
            os=nd["os"],
            value=int(nd["value"]),
            is_trap=bool(nd["is_trap"]),
            flag=bool(nd["flag"]),
            exploitable=bool(nd.get("exploitable", True)),
            properties=tuple(nd["properties"]),
            services=tuple(nd["services"]),
            local_vulns={v["index"]: _vuln_from_dict(v) for v in nd["local_vulns"]},
            remote_vulns={v["index"]: _vuln_from_dict(v) for v in nd["remote_vulns"]},
        )
    return NetworkTopology(
        name=data["name"],
        family=data["family"],
        nodes=nodes,
        edges=frozenset((a, b) for a, b in data["edges"]),
        entry=data["entry"],
        seed=int(data.get("seed", 0)),
    )


def loads(text):
    return from_dict(json.loads(text))


def load(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def save(topology, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(topology.dumps())


# --------------------------------------------------------------------------- chain

def build_chain(n_pairs, seed=0, name=None, max_nodes=None):
    """Linear ``start -> (Linux -> Windows)^n -> Linux[flag]`` chain.

    Each Linux node also hides one decoy: running ``ScanExplorerRecentFiles``
    there leaks a credential to an off-path trap node whose compromise costs
    reward. The trap's service is drawn from ``seed``.

    With ``max_nodes`` the network is sized to exactly that many nodes: only
    the first Linux nodes get traps if there is no room for all of them, and
    any remainder is filled with unreachable, non-exploitable infrastructure.
    """
    if not isinstance(n_pairs, (int, np.integer)) or n_pairs < 1:
        raise InvalidArgument(f"n_pairs must be a positive integer, got {n_pairs!r}")
    n_pairs = int(n_pairs)
    n_core = 2 * n_pairs + 2
    if max_nodes is not None and max_nodes < n_core:
        raise InvalidArgument(f"max_nodes {max_nodes} is below the {n_core} core nodes")
    n_traps = n_pairs if max_nodes is None else min(n_pairs, max_nodes - n_core)
    rng = np.random.default_rng(seed)
    L = LADDERS["chain"]
    idx = {name: ladder_index(L, name) for name in (
        "local(CrackKeePassX)", "remote(ProbeLinux)", "local(ScanBashHistory)",
        "remote(ProbeWindows)", "local(CrackKeePass)", "local(ScanExplorerRecentFiles)",
        "local(SudoAttempt)")}
    trap_services = ("SSH-key", "MySQL", "su")

    core = ["start"]
    for i in range(1, n_pairs + 1):
        core += [f"linux_{i}", f"windows_{i}"]
    core.append(f"linux_{n_pairs + 1}")
    flag_id = core[-1]

    nodes = {}
    edges = set()
    traps = []
    for pos, nid in enumerate(core):
        nxt = core[pos + 1] if pos + 1 < len(core) else None
        local, remote = {}, {}
        if nid == "start":
            cred = Credential(f"ssh:{nxt}", nxt, "SSH")
            local[idx["local(ScanBashHistory)"]] = Vulnerability(
                "ScanBashHistory", idx["local(ScanBashHistory)"], reveals=(nxt,), leaks=(cred,))
            nodes[nid] = NodeTemplate(nid, OTHER, 0, properties=("Start",), local_vulns=local)
        elif nid.startswith("linux_"):
            is_flag = nid == flag_id
            remote[idx["remote(ProbeLinux)"]] = Vulnerability(
                "ProbeLinux", idx["remote(ProbeLinux)"], properties=("Linux",))
            if not is_flag:
                i = int(nid.split("_")[1])
                has_trap = i <= n_traps
                rdp = Credential(f"rdp:{nxt}", nxt, "RDP")
                local[idx["local(ScanBashHistory)"]] = Vulnerability(
                    "ScanBashHistory", idx["local(ScanBashHistory)"], reveals=(nxt,))
                local[idx["local(CrackKeePassX)"]] = Vulnerability(
                    "CrackKeePassX", idx["local(CrackKeePassX)"], leaks=(rdp,))
                local[idx["local(SudoAttempt)"]] = Vulnerability(
                    "SudoAttempt", idx["local(SudoAttempt)"], properties=("root",))
            if not is_flag and has_trap:
                trap_id = f"trap_{i}"
                service = trap_services[int(rng.integers(len(trap_services)))]
                trap_cred = Credential(f"{service.lower()}:{trap_id}", trap_id, service)
                local[idx["local(ScanExplorerRecentFiles)"]] = Vulnerability(
                    "ScanExplorerRecentFiles", idx["local(ScanExplorerRecentFiles)"],
                    reveals=(trap_id,), leaks=(trap_cred,))
                traps.append(NodeTemplate(trap_id, LINUX, TRAP_VALUE, is_trap=True,
                                          properties=("Decoy",), services=(service,)))
                edges.add((nid, trap_id))
            nodes[nid] = NodeTemplate(
                nid, LINUX, FLAG_VALUE if is_flag else WORKSTATION_VALUE, flag=is_flag,
                properties=("Linux", "Flag") if is_flag else ("Linux",),
                services=("SSH",), local_vulns=local, remote_vulns=remote)
        else:
            ssh = Credential(f"ssh:{nxt}", nxt, "SSH")
            local[idx["local(CrackKeePass)"]] = Vulnerability(
                "CrackKeePass", idx["local(CrackKeePass)"], leaks=(ssh,))
            local[idx["local(ScanExplorerRecentFiles)"]] = Vulnerability(
                "ScanExplorerRecentFiles", idx["local(ScanExplorerRecentFiles)"], reveals=(nxt,))
            remote[idx["remote(ProbeWindows)"]] = Vulnerability(
                "ProbeWindows", idx["remote(ProbeWindows)"], properties=("Windows",))
            nodes[nid] = NodeTemplate(nid, WINDOWS, WORKSTATION_VALUE, properties=("Windows",),
                                      services=("RDP",), local_vulns=local, remote_vulns=remote)
        if nxt is not None:
            edges.add((nid, nxt))
    for trap in traps:
        nodes[trap.id] = trap
    if max_nodes is not None:
        for j in range(1, max_nodes - len(nodes) + 1):
            nodes[f"infra_{j}"] = NodeTemplate(f"infra_{j}", OTHER, 0, exploitable=False,
                                               properties=("Infrastructure",))
    return NetworkTopology(name or f"chain{n_pairs}", "chain", nodes, frozenset(edges), "start", int(seed))


# --------------------------------------------------------------------------- ctf

def build_ctf():
    """Fixed 12-node hub-and-spoke capture-the-flag network (9 exploitable nodes).

    ``Website`` is the hub. Node names, per-node attack labels and the order in
    which GitHubProject, Website.Directory and Sharepoint become visible are
    fixed; the credential wiring between them is a reconstruction.
    """
    L = LADDERS["ctf"]
    i = lambda name: ladder_index(L, name)  # noqa: E731

    def vuln(label, action, **kw):
        return i(action), Vulnerability(label, i(action), **kw)

    def c(cid, target, service):
        return Credential(cid, target, service)

    web_props = ("MySql", "Ubuntu", "nginx/1.10.3")
    specs = [
        NodeTemplate("client", OTHER, 0, local_vulns=dict([
            vuln("SearchEdgeHistory", "local(ScanBashHistory)", reveals=("Website",),
                 leaks=(c("WebsiteHTTPSCreds", "Website", "HTTPS"),)),
        ])),
        NodeTemplate("Website", LINUX, WORKSTATION_VALUE, properties=web_props, services=("HTTPS",),
                     local_vulns=dict([
                         vuln("CredScanBashHistory", "local(ScanBashHistory)",
                              reveals=("Website[user=monitor]",),
                              leaks=(c("MonitorBashCreds", "Website[user=monitor]", "SSH"),)),
                     ]),
                     remote_vulns=dict([
                         vuln("ScanPageSource", "remote(ProbeLinux)", reveals=("Website.Directory",)),
                         vuln("ScanPageContent", "remote(ProbeWindows)", reveals=("GitHubProject",)),
                     ])),
        NodeTemplate("Website[user=monitor]", LINUX, WORKSTATION_VALUE, properties=web_props,
                     services=("SSH",),
                     local_vulns=dict([
                         vuln("CredScan-HomeDirectory", "local(CrackKeePassX)",
                              reveals=("AzureResourceManager", "AzureStorage"),
                              leaks=(c("ADPrincipalCreds", "AzureResourceManager", "HTTPS"),
                                     c("SASTOKEN1", "AzureStorage", "HTTPS"))),
                     ])),
        NodeTemplate("GitHubProject", OTHER, WORKSTATION_VALUE, properties=("GitHub",), services=("GIT",),
                     remote_vulns=dict([
                         vuln("CredScanGitHistory", "remote(ProbeLinux)", reveals=("BuildServer",),
                              leaks=(c("GitHubToken", "GitHubProject", "GIT"),
                                     c("SASTOKEN2", "AzureStorage", "HTTPS"))),
                     ])),
        NodeTemplate("AzureStorage", OTHER, WORKSTATION_VALUE, properties=("CTFFLAG:LeakedCustomerData",),
                     services=("HTTPS",),
                     remote_vulns=dict([
                         vuln("AccessDataWithSASToken", "remote(ProbeFlagServer)",
                              properties=("CTFFLAG:LeakedCustomerData",)),
                     ])),
        NodeTemplate("AzureResourceManager", OTHER, WORKSTATION_VALUE,
                     properties=("CTFFLAG:LeakedCustomerData2",), services=("HTTPS",),
                     remote_vulns=dict([
                         vuln("ListAzureResources", "remote(ProbeWindows)", reveals=("AzureVM", "Firewall"),
                              leaks=(c("AzureVMCreds", "AzureVM", "RDP"),)),
                     ])),
        NodeTemplate("Website.Directory", LINUX, WORKSTATION_VALUE, properties=("Ubuntu", "nginx/1.10.3"),
                     services=("SSH-key",),
                     remote_vulns=dict([
                         vuln("NavigateWebDirectory", "remote(ProbeLinux)", reveals=("DNSServer",),
                              leaks=(c("WebDirectoryKey", "Website.Directory", "SSH-key"),)),
                         vuln("NavigateWebDirectoryFurther", "remote(ProbeWindows)", reveals=("Sharepoint",)),
                     ])),
        NodeTemplate("Sharepoint", WINDOWS, WORKSTATION_VALUE, properties=("SharepointLeakingPassword",),
                     services=("HTTPS",),
                     remote_vulns=dict([
                         vuln("ScanSharepointParentDirectory", "remote(ProbeLinux)",
                              leaks=(c("SharepointCreds", "Sharepoint", "HTTPS"),
                                     c("ADPrincipalCreds2", "AzureResourceManager", "HTTPS"))),
                     ])),
        NodeTemplate("AzureVM", LINUX, FLAG_VALUE, flag=True, properties=("CTFFLAG:VMPRIVATEINFO",),
                     services=("RDP",),
                     local_vulns=dict([
                         vuln("ExfiltrateFlag", "local(ExfiltrateFlag)", properties=("CTFFLAG:VMPRIVATEINFO",)),
                     ])),
        NodeTemplate("Firewall", OTHER, 0, exploitable=False, properties=("Infrastructure",)),
        NodeTemplate("DNSServer", OTHER, 0, exploitable=False, properties=("Infrastructure",)),
        NodeTemplate("BuildServer", OTHER, 0, exploitable=False, properties=("Infrastructure",)),
    ]
    nodes = {n.id: n for n in specs}
    hub = "Website"
    edges = {("client", hub)}
    for spoke in ("Website[user=monitor]", "GitHubProject", "Website.Directory", "AzureStorage",
                  "Sharepoint", "AzureResourceManager"):
        edges.add((hub, spoke))
    edges |= {
        ("Website[user=monitor]", "AzureResourceManager"),
        ("Website[user=monitor]", "AzureStorage"),
        ("GitHubProject", "AzureStorage"),
        ("GitHubProject", "BuildServer"),
        ("Website.Directory", "Sharepoint"),
        ("Website.Directory", "DNSServer"),
        ("Sharepoint", "AzureResourceManager"),
        ("AzureResourceManager", "AzureVM"),
        ("AzureResourceManager", "Firewall"),
    }
    return NetworkTopology("ctf", "ctf", nodes, frozenset(edges), "client", 0)


# name -> (Linux/Windows pairs, total node count or None for core + one trap per pair).
# The larger presets follow the published exploitable/total counts: 12/22, 70/100, 350/500.
CHAIN_PRESETS = {"CC6": (2, None), "CC10": (4, None), "CC22": (5, 22), "CC100": (34, 100), "CC500": (174, 500)}
PRESETS = ("ctf",) + tuple(CHAIN_PRESETS)


def build_preset(name, seed=0):
    key = name.upper()
    if key == "CTF":
        return build_ctf()
    if key in CHAIN_PRESETS:
        pairs, total = CHAIN_PRESETS[key]
        return build_chain(pairs, seed, name=key, max_nodes=total)
    raise InvalidArgument(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
