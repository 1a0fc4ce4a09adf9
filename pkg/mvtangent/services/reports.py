"""
Check reports shared by the verifiers.
Every report is { ok: bool, checks: [{id, anchor, name, ok, detail}], issues: [str] }.
`anchor` names the mathematical condition a check verifies, in the vocabulary of the theory
(e.g. "rationally outgoing (b)", "crux", "principal ideal").
"""
from typing import Dict, Iterable, List


def check(cid: str, name: str, ok: bool, detail: str = "", advisory: bool = False, *, anchor: str) -> Dict:
    out = {"id": cid, "anchor": anchor, "name": name, "ok": bool(ok), "detail": detail}
    if advisory:
        out["advisory"] = True
    return out


def build_report(checks: Iterable[Dict], **extra) -> Dict:
    checks = list(checks)
    issues: List[str] = []
    for c in checks:
        if not c["ok"]:
            tag = " (advisory)" if c.get("advisory") else ""
            issues.append(f"{c['name']}{tag}: {c['detail']}" if c["detail"] else f"{c['name']}{tag} failed")
    ok = all(c["ok"] for c in checks if not c.get("advisory"))
    return {"ok": ok, "checks": checks, "issues": issues, **extra}


def summary_line(report: Dict) -> str:
    passed = sum(1 for c in report["checks"] if c["ok"])
    verdict = "PASS" if report["ok"] else "FAIL"
    return f"{verdict}: {passed}/{len(report['checks'])} checks passed"
