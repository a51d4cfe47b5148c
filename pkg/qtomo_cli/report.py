from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .utils import fmt_float, write_text


def _value(v: Any) -> str:
    if isinstance(v, float):
        return fmt_float(v)
    if isinstance(v, (list, tuple)):
        return ", ".join(_value(x) for x in v)
    return str(v)


def build_summary_md(
    name: str,
    run_dir: Path,
    resolved: Dict[str, Any],
    outputs: Sequence[Tuple[str, str]],
    headlines: Dict[str, Any],
    warnings: Sequence[str] = (),
) -> str:
    lines: List[str] = []
    lines.append(f"# Run Summary: {name}")
    lines.append("")
    lines.append("## Run")
    lines.append(f"- Directory: `{run_dir}`")
    lines.append(f"- System: `{resolved.get('system') or 'N/A'}`")
    lines.append(f"- Outputs requested: `{_value(resolved.get('outputs', [])) or 'none'}`")
    lines.append("")
    lines.append("## Headline Numbers")
    if headlines:
        for k in sorted(headlines):
            lines.append(f"- {k}: `{_value(headlines[k])}`")
    else:
        lines.append("- None (no products requested).")
    lines.append("")
    lines.append("## Files")
    if outputs:
        for rel, digest in outputs:
            lines.append(f"- `{rel}` sha256 `{digest[:16]}`")
    else:
        lines.append("- manifest.json only")
    lines.append("")
    lines.append("## Warnings")
    if warnings:
        for w in warnings:
            lines.append(f"- {w}")
    else:
        lines.append("- None.")
    lines.append("")
    lines.append("## Resolved Configuration")
    for k, v in resolved.items():
        lines.append(f"- {k} = `{_value(v)}`")
    lines.append("")
    return "\n".join(lines)


def build_unresolved_md(title: str, details: List[str], resolved: Optional[Dict[str, Any]] = None) -> str:
    """Error report; carries the resolved scenario when the failure came after resolution."""
    lines: List[str] = [f"# {title}", ""]
    lines.extend(f"- {d}" for d in details)
    if resolved:
        lines.append("")
        lines.append("## Resolved Configuration")
        lines.extend(f"- {k} = `{_value(v)}`" for k, v in resolved.items())
    lines.append("")
    return "\n".join(lines)


def write_report(path: Path, content: str) -> None:
    write_text(path, content)
