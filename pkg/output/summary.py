"""
output/summary.py - Resumen de texto plano de una ejecución (summary.txt).
"""

import logging
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional

logger = logging.getLogger(__name__)


@dataclass
class LevelSummary:
    level: int
    method: str
    unknowns: Dict[str, int]
    iterations: int
    final_residual: Optional[float]
    converged: bool
    elapsed: float
    conservation: Dict[str, float]
    infsup: Optional[float] = None


@dataclass
class RunSummary:
    scenario: str
    settings: Dict[str, object]
    levels: List[LevelSummary] = field(default_factory=list)
    tables: List[str] = field(default_factory=list)

    def render(self) -> str:
        lines = [
            f"Escenario: {self.scenario}",
            f"Fecha: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}",
            "Configuración:",
        ]
        lines += [f"  {k} = {v}" for k, v in self.settings.items()]
        for entry in self.levels:
            lines.append("")
            lines.append(f"Nivel {entry.level} [{entry.method}] {entry.elapsed:.2f}s")
            lines.append("  incógnitas: " + ", ".join(f"{k}={v}" for k, v in entry.unknowns.items()))
            if entry.method == "dd":
                status = "convergió" if entry.converged else "NO convergió"
                residual = f"{entry.final_residual:.3e}" if entry.final_residual is not None else "-"
                lines.append(f"  CG: {entry.iterations} iteraciones, residuo relativo {residual} ({status})")
            lines.append("  conservación: " + ", ".join(f"{k}={v:.2e}" for k, v in entry.conservation.items()))
            if entry.infsup is not None:
                lines.append(f"  inf-sup del mortero: {entry.infsup:.4f}")
        for table in self.tables:
            lines += ["", table]
        return "\n".join(lines) + "\n"

    def write(self, output_dir) -> Path:
        path = Path(output_dir) / "summary.txt"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.render(), encoding="utf-8")
        logger.info(f"Resumen escrito en {path}")
        return path
