import csv
import io
from datetime import datetime
from typing import List, Optional

from reportlab.lib import colors
from reportlab.lib.pagesizes import letter
from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
from reportlab.lib.units import inch
from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

from .models import BoundCurve, SearchReport, ThetaVerification

CSV_HEADER = ["z", "upper", "lb1", "lb2", "lb3", "lb4", "lb_max", "s_inf"]

TABLE_STYLE = [
    ("BACKGROUND", (0, 0), (-1, 0), colors.grey),
    ("TEXTCOLOR", (0, 0), (-1, 0), colors.whitesmoke),
    ("ALIGN", (0, 0), (-1, -1), "CENTER"),
    ("FONTNAME", (0, 0), (-1, 0), "Helvetica-Bold"),
    ("FONTSIZE", (0, 0), (-1, -1), 9),
    ("BOTTOMPADDING", (0, 0), (-1, -1), 6),
    ("GRID", (0, 0), (-1, -1), 1, colors.black),
]

META_STYLE = [
    ("ALIGN", (0, 0), (-1, -1), "LEFT"),
    ("FONTNAME", (0, 0), (0, -1), "Helvetica-Bold"),
    ("FONTSIZE", (0, 0), (-1, -1), 10),
    ("BOTTOMPADDING", (0, 0), (-1, -1), 6),
]


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def _complex(value: complex) -> str:
    return f"{value.real:+.6f}{value.imag:+.6f}i"


def _channel_label(report: SearchReport) -> str:
    channel = report.channel
    if channel.kind == "classical":
        return f"classical noise, n = {channel.n:g}"
    return f"thermal noise, eta = {channel.eta:g}, N = {channel.N:g}"


class ReportGenerator:
    """Generates verification and search reports in Markdown and PDF formats"""

    def __init__(self):
        self.styles = getSampleStyleSheet()
        self._setup_custom_styles()

    def _setup_custom_styles(self):
        """Set up custom styles for PDF generation"""
        self.styles.add(
            ParagraphStyle(
                name="CustomTitle",
                parent=self.styles["Heading1"],
                fontSize=18,
                spaceAfter=30,
                textColor=colors.darkblue,
            )
        )

        self.styles.add(
            ParagraphStyle(
                name="SectionHeader",
                parent=self.styles["Heading2"],
                fontSize=14,
                spaceBefore=20,
                spaceAfter=10,
                textColor=colors.darkblue,
            )
        )

        self.styles.add(
            ParagraphStyle(
                name="VerdictStyle",
                parent=self.styles["Normal"],
                fontSize=20,
                alignment=1,  # Center alignment
                textColor=colors.darkgreen,
            )
        )

    # --- Circulant verification ---------------------------------------------

    def generate_theta_markdown(
        self, report: ThetaVerification, output_path: Optional[str] = None
    ) -> str:
        """Generate a Markdown report of the circulant and factor checks"""
        timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
        emoji = self._status_emoji(report.passed)
        system = report.system

        content = f"""# Circulant Factor Verification {emoji}

**Generated:** {timestamp}
**Modes (k):** {report.k}
**Noise (n):** {report.n:g}

---

## 🧮 Eigen-data

| j | a_j | e_j | d_j |
|---|-----|-----|-----|
"""
        for j in range(report.k):
            content += (
                f"| {j} | {_complex(system.a_eigs[j])} | {_complex(system.g_eigs[j])} "
                f"| {_complex(system.c_eigs[j])} |\n"
            )

        content += """
## 🔢 Factors

| j | Prefactor | Ratio | Identity |
|---|-----------|-------|----------|
"""
        for factor in report.factors:
            identity = "✅" if factor.is_identity else ""
            content += (
                f"| {factor.index} | {_complex(factor.prefactor)} "
                f"| {_complex(factor.ratio)} | {identity} |\n"
            )

        content += f"""
## 🎯 Checks

| Check | Value | Tolerance | Status |
|-------|-------|-----------|--------|
| Eigenvalue deviation | {report.eigen_deviation:.3e} | - | ✅ |
| Determinant residual | {report.det_residual:.3e} | {report.tolerance_det:.0e} | {self._status_emoji(report.det_residual <= report.tolerance_det)} |
| Characteristic function | {report.char_max_deviation:.3e} | {report.tolerance_char:.0e} | {self._status_emoji(report.char_max_deviation <= report.tolerance_char)} |

**Determinant product:** {_fmt(report.det_product)}
**Target (n+1)^k - n^k:** {_fmt(report.det_target)}
**Purity bound:** {_fmt(1.0 / report.det_target)}
"""  # noqa: E501

        if output_path:
            with open(output_path, "w", encoding="utf-8") as f:
                f.write(content)

        return content

    def generate_theta_pdf(self, report: ThetaVerification, output_path: str) -> None:
        """Generate a PDF report of the circulant and factor checks"""
        story = self._header(
            "Circulant Factor Verification",
            [
                ["Modes (k):", str(report.k)],
                ["Noise (n):", f"{report.n:g}"],
            ],
        )
        story.append(self._verdict(report.passed))

        story.append(Paragraph("Factors", self.styles["SectionHeader"]))
        rows = [["j", "Prefactor", "Ratio", "Identity"]]
        for factor in report.factors:
            rows.append(
                [
                    str(factor.index),
                    _complex(factor.prefactor),
                    _complex(factor.ratio),
                    "Yes" if factor.is_identity else "No",
                ]
            )
        story.append(self._table(rows, [0.5, 2.0, 2.0, 1.0]))

        story.append(Paragraph("Checks", self.styles["SectionHeader"]))
        checks = [
            ["Check", "Value", "Tolerance"],
            ["Eigenvalue deviation", f"{report.eigen_deviation:.3e}", "-"],
            [
                "Determinant residual",
                f"{report.det_residual:.3e}",
                f"{report.tolerance_det:.0e}",
            ],
            [
                "Characteristic function",
                f"{report.char_max_deviation:.3e}",
                f"{report.tolerance_char:.0e}",
            ],
        ]
        story.append(self._table(checks, [2.2, 1.4, 1.2]))
        self._build(output_path, story)

    # --- Conjecture search --------------------------------------------------

    def generate_search_markdown(
        self, report: SearchReport, output_path: Optional[str] = None
    ) -> str:
        """Generate a Markdown report of a minimum-output-entropy search"""
        timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
        emoji = "🔴" if report.violation else "🟢"
        order = "" if report.z is None else f"**Order (z):** {report.z:g}\n"
        converged = "✅" if report.converged else "❌"
        violation = "🚩" if report.violation else "none"

        content = f"""# Minimum Output Entropy Search {emoji}

**Generated:** {timestamp}
**Channel:** {_channel_label(report)}
**Objective:** {report.objective.value}
{order}**Starts:** {report.starts} (seed {report.seed})

---

## 🎯 Result

| Quantity | Value |
|----------|-------|
| Best value | {_fmt(report.best_value)} |
| Coherent value | {_fmt(report.coherent_value)} |
| Gap | {report.gap:.3e} |
| Truncation error | {report.truncation_error:.3e} |
| Converged | {converged} |
| Violation | {violation} |

## 📊 Best Input Amplitudes

| Level | Amplitude | Population |
|-------|-----------|------------|
"""
        for level, amp in enumerate(report.best_state.amplitudes):
            content += f"| {level} | {_complex(amp)} | {abs(amp) ** 2:.6f} |\n"

        content += """
---

## ⚡ How to Interpret This Report

- **Gap:** best value minus the coherent-state value; negative gaps within the truncation error are numerical noise
- **Violation:** only flagged when the gap is well below the truncation error estimate
"""  # noqa: E501

        if output_path:
            with open(output_path, "w", encoding="utf-8") as f:
                f.write(content)

        return content

    def generate_search_pdf(self, report: SearchReport, output_path: str) -> None:
        """Generate a PDF report of a minimum-output-entropy search"""
        meta = [
            ["Channel:", _channel_label(report)],
            ["Objective:", report.objective.value],
            ["Starts:", f"{report.starts} (seed {report.seed})"],
        ]
        if report.z is not None:
            meta.append(["Order (z):", f"{report.z:g}"])
        story = self._header("Minimum Output Entropy Search", meta)
        story.append(self._verdict(not report.violation))

        story.append(Paragraph("Result", self.styles["SectionHeader"]))
        rows = [
            ["Quantity", "Value"],
            ["Best value", _fmt(report.best_value)],
            ["Coherent value", _fmt(report.coherent_value)],
            ["Gap", f"{report.gap:.3e}"],
            ["Truncation error", f"{report.truncation_error:.3e}"],
            ["Converged", "Yes" if report.converged else "No"],
        ]
        story.append(self._table(rows, [2.0, 2.5]))
        self._build(output_path, story)

    # --- Bound curves -------------------------------------------------------

    def write_bounds_csv(
        self, curve: BoundCurve, output_path: Optional[str] = None
    ) -> str:
        """Bound curves as CSV with 12 significant digits and LF line endings"""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        lb_max = curve.lb_max
        for i, z in enumerate(curve.z_grid):
            values = [
                z,
                curve.upper[i],
                curve.lb1[i],
                curve.lb2[i],
                curve.lb3[i],
                curve.lb4[i],
                lb_max[i],
                curve.s_inf,
            ]
            writer.writerow([_fmt(v) for v in values])
        content = buffer.getvalue()

        if output_path:
            with open(output_path, "w", encoding="utf-8", newline="") as f:
                f.write(content)

        return content

    # --- PDF helpers --------------------------------------------------------

    def _header(self, title: str, meta: List[List[str]]) -> list:
        timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
        meta_table = Table(
            [["Generated:", timestamp]] + meta, colWidths=[2 * inch, 3.5 * inch]
        )
        meta_table.setStyle(TableStyle(META_STYLE))
        return [
            Paragraph(title, self.styles["CustomTitle"]),
            Spacer(1, 20),
            meta_table,
            Spacer(1, 20),
        ]

    def _verdict(self, passed: bool) -> Paragraph:
        return Paragraph("PASSED" if passed else "FAILED", self.styles["VerdictStyle"])

    def _table(self, rows: List[List[str]], widths: List[float]) -> Table:
        table = Table(rows, colWidths=[w * inch for w in widths])
        table.setStyle(TableStyle(TABLE_STYLE))
        return table

    def _build(self, output_path: str, story: list) -> None:
        doc = SimpleDocTemplate(
            output_path,
            pagesize=letter,
            rightMargin=72,
            leftMargin=72,
            topMargin=72,
            bottomMargin=18,
        )
        doc.build(story)

    def _status_emoji(self, passed: bool) -> str:
        """Get emoji for a pass/fail check"""
        return "✅" if passed else "❌"
