from .render import FigureSpec, FIGURE_KINDS, render
from .io import SchemaError, read_rows
