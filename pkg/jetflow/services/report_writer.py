"""
Report Writer Module

Writes every run artefact: numeric tables as whitespace-separated text with
a '#' header, report.json, and a human-readable summary rendered from a
Jinja2 template with a YAML front-matter block. Every file is written to a
temporary sibling first and moved into place, so readers never observe a
partial file.
"""

import io
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Dict, Iterable

import frontmatter
import numpy as np
from jinja2 import Environment, FileSystemLoader, StrictUndefined, TemplateError, meta

from jetflow.schemas.reports import RunReport

logger = logging.getLogger(__name__)


def atomic_write_text(path: Path, text: str) -> Path:
    """Write text to path through a temporary file and os.replace."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    handle, temporary = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(handle, "w", encoding="utf-8") as stream:
            stream.write(text)
        os.replace(temporary, path)
    except BaseException:
        if os.path.exists(temporary):
            os.unlink(temporary)
        raise
    return path


def write_table(path: Path, columns: Iterable[str], rows: np.ndarray) -> Path:
    """Whitespace-separated table with a '# col1 col2 ...' header line."""
    buffer = io.StringIO()
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    np.savetxt(buffer, rows, fmt="%.17g", header=" ".join(columns), comments="# ")
    logger.debug(f"Writing table {path} ({rows.shape[0]} rows)")
    return atomic_write_text(path, buffer.getvalue())


def write_report(path: Path, report: RunReport) -> Path:
    return atomic_write_text(path, json.dumps(report.model_dump(mode="json"), indent=2, allow_nan=True) + "\n")


class SummaryRenderer:
    """Renders the run summary template.

    Templates live in jetflow/templates as <name>.j2 with a YAML front-matter
    header (title, description) followed by the Jinja2 body.

    Example:
        text = SummaryRenderer.render("run_summary", report=report)
    """

    _env = None

    @classmethod
    def _get_env(cls, templates_dir: str = "templates") -> Environment:
        if cls._env is None:
            cls._env = Environment(
                loader=FileSystemLoader(Path(__file__).parent.parent / templates_dir),
                undefined=StrictUndefined,
                trim_blocks=True,
                lstrip_blocks=True,
            )
        return cls._env

    @classmethod
    def _load(cls, template: str) -> frontmatter.Post:
        env = cls._get_env()
        with open(env.loader.get_source(env, f"{template}.j2")[1], encoding="utf-8") as file:
            return frontmatter.load(file)

    @classmethod
    def render(cls, template: str, **kwargs) -> str:
        """Render a template body.

        Raises:
            ValueError: If rendering fails (for example an undefined variable).
        """
        post = cls._load(template)
        try:
            return cls._get_env().from_string(post.content).render(
                title=post.metadata.get("title", template), **kwargs
            )
        except TemplateError as e:
            raise ValueError(f"Error rendering template: {str(e)}")

    @classmethod
    def template_info(cls, template: str) -> Dict:
        post = cls._load(template)
        variables = meta.find_undeclared_variables(cls._get_env().parse(post.content))
        return {
            "name": template,
            "description": post.metadata.get("description", "No description provided"),
            "variables": sorted(variables - {"title"}),
            "frontmatter": post.metadata,
        }


def write_summary(path: Path, report: RunReport) -> Path:
    return atomic_write_text(path, SummaryRenderer.render("run_summary", report=report))


def write_solution_tables(output_dir: Path, output, field, curve=None, flow=None) -> Dict[str, str]:
    """Field, grid, curve and velocity dumps selected by the output settings.

    Returns:
        Table name -> file name, for report.json.
    """
    output_dir = Path(output_dir)
    tables: Dict[str, str] = {}
    if output.write_field:
        path = write_table(output_dir / "field.dat", ["x", "y", "psi", "wet"], field.columns(output.field_stride))
        tables["field"] = path.name
    if output.write_grid:
        path = write_table(output_dir / "grid.dat", ["x", "y", "class", "dirichlet"], field.grid.columns())
        tables["grid"] = path.name
    if output.write_curve and curve is not None:
        path = write_table(output_dir / "curve.dat", ["x", "k", "truncated", "grad_mag"], curve.rows())
        tables["curve"] = path.name
    if output.write_field and flow is not None:
        stride = output.field_stride
        sl = (slice(None, None, stride), slice(None, None, stride))
        rows = np.column_stack(
            [field.grid.X[sl].ravel(), field.grid.Y[sl].ravel(), flow.u[sl].ravel(), flow.v[sl].ravel(), flow.p[sl].ravel()]
        )
        path = write_table(output_dir / "velocity.dat", ["x", "y", "u", "v", "p"], rows)
        tables["velocity"] = path.name
    return tables
