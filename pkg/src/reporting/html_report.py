"""HTML page for a matrix run: grouped classification tables, experiments and failures."""

import html
import json
from datetime import datetime
from pathlib import Path
from typing import List, Optional, Sequence

from core.classification import BUCKETS, get_classification_color, get_classification_emoji
from reporting.aggregate import TABLE_HEADER, MatrixSummary
from reporting.findings import AnalysisReport


def generate_html_report(
    summary: MatrixSummary,
    output_path: str,
    reports: Sequence[AnalysisReport] = (),
    title: Optional[str] = None,
    version: str = "",
) -> str:
    """Generate an HTML page from a matrix summary.

    Args:
        summary: Aggregated matrix summary
        output_path: Path to write the HTML file
        reports: Per-experiment reports to list below the tables
        title: Optional page title
        version: ctdiff version shown in the header

    Returns:
        Path to the generated page
    """
    totals = summary.totals
    cards = "".join(
        _card(bucket, totals.get(bucket, 0)) for bucket in [*BUCKETS, "failed"]
    )

    page = _get_html_template().format(
        title=html.escape(title or "ctdiff matrix summary"),
        generated_date=datetime.now().strftime("%Y-%m-%d %H:%M:%S"),
        version=html.escape(version),
        total_experiments=totals.get("experiments", 0),
        cards=cards,
        group_tables="".join(_group_table(summary, key) for key in summary.group_by),
        experiment_rows=_experiment_rows(reports),
        failure_rows=_failure_rows(summary),
        chart_data=json.dumps({b: totals.get(b, 0) for b in [*BUCKETS, "failed"]}),
    )

    out = Path(output_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(page, encoding="utf-8")
    return str(out)


def _card(bucket: str, value: int) -> str:
    return f"""
            <div class="card" style="border-top: 4px solid {get_classification_color(bucket)}">
                <h3>{get_classification_emoji(bucket)} {html.escape(bucket)}</h3>
                <div class="value">{value}</div>
            </div>"""


def _group_table(summary: MatrixSummary, key: str) -> str:
    head = "".join(f"<th>{html.escape(h)}</th>" for h in TABLE_HEADER)
    rows: List[str] = []
    for group, counts in summary.tables.get(key, {}).items():
        cells = "".join(f'<td class="text-center">{v}</td>' for v in counts.as_row())
        rows.append(f"<tr><td><code>{html.escape(group)}</code></td>{cells}</tr>")
    return f"""
        <h2>By {html.escape(key)}</h2>
        <table>
            <thead><tr>{head}</tr></thead>
            <tbody>{''.join(rows)}</tbody>
        </table>"""


def _experiment_rows(reports: Sequence[AnalysisReport]) -> str:
    rows = []
    for r in sorted(reports, key=lambda r: r.experiment_id):
        params = ", ".join(f"{k}={v}" for k, v in sorted(r.parameters.items()))
        functions = sorted({f.function_name for f in r.unfiltered})
        rows.append(
            f"""
            <tr>
                <td><code>{html.escape(r.experiment_id)}</code></td>
                <td>{html.escape(params)}</td>
                <td class="text-center">{get_classification_emoji(r.classification.value)} {r.classification.value}</td>
                <td class="text-center">{len(r.unfiltered)} / {len(r.findings)}</td>
                <td>{html.escape(', '.join(functions)) or '-'}</td>
            </tr>"""
        )
    return "".join(rows) or '<tr><td colspan="5">No reports</td></tr>'


def _failure_rows(summary: MatrixSummary) -> str:
    rows = [
        f"<tr><td><code>{html.escape(f.experiment_id)}</code></td><td>{html.escape(f.error)}</td></tr>"
        for f in summary.failures
    ]
    return "".join(rows) or '<tr><td colspan="2">No failures</td></tr>'


def _get_html_template() -> str:
    """Get the HTML template for matrix summaries."""
    return """<!DOCTYPE html>
<html lang="en">
<head>
    <meta charset="UTF-8">
    <meta name="viewport" content="width=device-width, initial-scale=1.0">
    <title>{title}</title>
    <style>
        :root {{
            --color-bg: #f8f9fa;
            --color-card: #ffffff;
            --color-text: #212529;
            --color-text-muted: #6c757d;
            --color-border: #dee2e6;
        }}

        * {{ box-sizing: border-box; margin: 0; padding: 0; }}

        body {{
            font-family: -apple-system, BlinkMacSystemFont, 'Segoe UI', Roboto, sans-serif;
            background: var(--color-bg);
            color: var(--color-text);
            line-height: 1.6;
        }}

        .container {{ max-width: 1400px; margin: 0 auto; padding: 2rem; }}

        header {{
            background: linear-gradient(135deg, #2b5876 0%, #4e4376 100%);
            color: white;
            padding: 2rem;
            margin-bottom: 2rem;
            border-radius: 8px;
        }}

        header h1 {{ font-size: 2rem; margin-bottom: 0.5rem; }}
        header .meta {{ opacity: 0.9; font-size: 0.9rem; }}

        h2 {{ margin: 1.5rem 0 0.75rem; }}

        .summary-cards {{
            display: grid;
            grid-template-columns: repeat(auto-fit, minmax(160px, 1fr));
            gap: 1rem;
            margin-bottom: 2rem;
        }}

        .card {{
            background: var(--color-card);
            border-radius: 8px;
            padding: 1.5rem;
            box-shadow: 0 2px 4px rgba(0,0,0,0.1);
        }}

        .card h3 {{
            font-size: 0.85rem;
            color: var(--color-text-muted);
            margin-bottom: 0.5rem;
            text-transform: uppercase;
        }}

        .card .value {{ font-size: 2.5rem; font-weight: bold; }}

        table {{
            width: 100%;
            border-collapse: collapse;
            background: var(--color-card);
            border-radius: 8px;
            overflow: hidden;
            box-shadow: 0 2px 4px rgba(0,0,0,0.1);
            margin-bottom: 2rem;
        }}

        th, td {{
            padding: 0.75rem 1rem;
            text-align: left;
            border-bottom: 1px solid var(--color-border);
        }}

        th {{
            background: #f1f3f4;
            font-weight: 600;
            font-size: 0.85rem;
            text-transform: uppercase;
        }}

        tr:hover {{ background: #f8f9fa; }}
        .text-center {{ text-align: center; }}

        code {{
            background: #f1f3f4;
            padding: 0.2rem 0.4rem;
            border-radius: 4px;
            font-family: 'Monaco', 'Consolas', monospace;
            font-size: 0.85em;
        }}

        .chart-container {{ max-width: 300px; margin: 0 auto 2rem; }}

        footer {{ text-align: center; padding: 2rem; color: var(--color-text-muted); }}
    </style>
</head>
<body>
    <div class="container">
        <header>
            <h1>{title}</h1>
            <p class="meta">Generated: {generated_date} • ctdiff v{version} • {total_experiments} experiments</p>
        </header>

        <div class="summary-cards">{cards}
        </div>

        <div class="chart-container">
            <canvas id="classificationChart"></canvas>
        </div>

        {group_tables}

        <h2>Experiments</h2>
        <table>
            <thead>
                <tr>
                    <th>Experiment</th>
                    <th>Parameters</th>
                    <th class="text-center">Classification</th>
                    <th class="text-center">Unfiltered / all findings</th>
                    <th>Functions</th>
                </tr>
            </thead>
            <tbody>
                {experiment_rows}
            </tbody>
        </table>

        <h2>Failures</h2>
        <table>
            <thead><tr><th>Experiment</th><th>Error</th></tr></thead>
            <tbody>
                {failure_rows}
            </tbody>
        </table>

        <footer>
            <p>Generated by <strong>ctdiff</strong>. Findings are a lower bound on secret-dependent behaviour.</p>
        </footer>
    </div>

    <script src="https://cdn.jsdelivr.net/npm/chart.js@4.4.1/dist/chart.umd.min.js"></script>
    <script>
        const chartData = {chart_data};
        const ctx = document.getElementById('classificationChart');
        const total = Object.values(chartData).reduce((a, b) => a + b, 0);
        if (ctx && total > 0) {{
            new Chart(ctx, {{
                type: 'doughnut',
                data: {{
                    labels: Object.keys(chartData),
                    datasets: [{{
                        data: Object.values(chartData),
                        backgroundColor: ['#28a745', '#ffc107', '#a33ea1', '#dc3545', '#6c757d'],
                        borderWidth: 0,
                    }}]
                }},
                options: {{
                    responsive: true,
                    plugins: {{ legend: {{ position: 'bottom' }} }}
                }}
            }});
        }}
    </script>
</body>
</html>"""
