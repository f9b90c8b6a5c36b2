"""
Static SVG scatter of eigenvalue-ratio points (x, y) = (lam2/lam1, lam3/lam1) with the
rectangle curve, the disjoint-discs line y = K2 and the bounds envelope overlaid.
Output depends only on the inputs, so reruns are byte-identical.
"""
import logging
from xml.sax.saxutils import escape

import numpy as np

from .analytic import k2, rectangle_curve

logger = logging.getLogger(__name__)

WIDTH = 720.0
HEIGHT = 540.0
MARGIN = 60.0
X_RANGE = (1.0, 2.6)
Y_RANGE = (1.0, 4.0)

CLASS_COLORS = {
    'rectangle': '#1f77b4', 'triangle': '#ff7f0e', 'quadrilateral': '#2ca02c', 'ellipse': '#d62728',
    'sector': '#9467bd', 'dumbbell': '#8c564b', 'jigsaw': '#e377c2', 'polygon': '#7f7f7f',
    'star': '#bcbd22', 'difference': '#17becf',
}
DEFAULT_COLOR = '#333333'


class _Frame(object):
    def __init__(self, x_range, y_range, width, height, margin):
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range
        self.width, self.height, self.margin = width, height, margin

    def __call__(self, x, y):
        w = self.width - 2 * self.margin
        h = self.height - 2 * self.margin
        px = self.margin + (np.asarray(x, dtype=float) - self.x0) / (self.x1 - self.x0) * w
        py = self.height - self.margin - (np.asarray(y, dtype=float) - self.y0) / (self.y1 - self.y0) * h
        return px, py


def _path(px, py):
    return 'M ' + ' L '.join(f'{x:.2f} {y:.2f}' for x, y in zip(px, py))


def _axes(frame, ticks=8):
    parts = []
    left, bottom = frame(frame.x0, frame.y0)
    right, top = frame(frame.x1, frame.y1)
    parts.append(f'  <rect x="{left:.2f}" y="{top:.2f}" width="{right - left:.2f}" height="{bottom - top:.2f}" '
                 f'fill="none" stroke="#000" stroke-width="1"/>')
    for t in np.linspace(frame.x0, frame.x1, ticks + 1):
        px, _ = frame(t, frame.y0)
        parts.append(f'  <line x1="{px:.2f}" y1="{bottom:.2f}" x2="{px:.2f}" y2="{bottom + 5:.2f}" stroke="#000"/>')
        parts.append(f'  <text x="{px:.2f}" y="{bottom + 18:.2f}" font-size="11" text-anchor="middle">{t:.2f}</text>')
    for t in np.linspace(frame.y0, frame.y1, ticks + 1):
        _, py = frame(frame.x0, t)
        parts.append(f'  <line x1="{left - 5:.2f}" y1="{py:.2f}" x2="{left:.2f}" y2="{py:.2f}" stroke="#000"/>')
        parts.append(f'  <text x="{left - 8:.2f}" y="{py + 4:.2f}" font-size="11" text-anchor="end">{t:.2f}</text>')
    parts.append(f'  <text x="{0.5 * (left + right):.2f}" y="{frame.height - 15:.2f}" font-size="13" '
                 f'text-anchor="middle">&#955;2/&#955;1</text>')
    parts.append(f'  <text x="15" y="{0.5 * (top + bottom):.2f}" font-size="13" text-anchor="middle" '
                 f'transform="rotate(-90 15 {0.5 * (top + bottom):.2f})">&#955;3/&#955;1</text>')
    return parts


def ratio_svg(points, envelope=None, title=None, width=WIDTH, height=HEIGHT):
    """
    SVG text for `points`, an iterable of (x, y, class_tag). `envelope` is a BoundCurve
    or None; the rectangle curve and the line y = K2 are always drawn.
    """
    frame = _Frame(X_RANGE, Y_RANGE, width, height, MARGIN)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width:.0f} {height:.0f}" '
             f'width="{width:.0f}" height="{height:.0f}" font-family="sans-serif">',
             f'  <rect x="0" y="0" width="{width:.0f}" height="{height:.0f}" fill="#fff"/>']
    parts += _axes(frame)

    xs = np.linspace(1.0, 2.5, 301)
    px, py = frame(xs, [rectangle_curve(x) for x in xs])
    parts.append(f'  <path d="{_path(px, py)}" fill="none" stroke="#000" stroke-width="1.5"/>')
    c = k2()
    px, py = frame([1.0, c], [c, c])
    parts.append(f'  <path d="{_path(px, py)}" fill="none" stroke="#555" stroke-width="1.2" stroke-dasharray="6 4"/>')
    if envelope is not None:
        px, py = frame(envelope.grid, np.minimum(envelope.envelope, Y_RANGE[1]))
        parts.append(f'  <path d="{_path(px, py)}" fill="none" stroke="#c00" stroke-width="1.2"/>')

    seen = []
    for x, y, tag in points:
        if not (np.isfinite(x) and np.isfinite(y)):
            continue
        if tag not in seen:
            seen.append(tag)
        cx, cy = frame(min(max(x, X_RANGE[0]), X_RANGE[1]), min(max(y, Y_RANGE[0]), Y_RANGE[1]))
        parts.append(f'  <circle cx="{cx:.2f}" cy="{cy:.2f}" r="1.6" fill="{CLASS_COLORS.get(tag, DEFAULT_COLOR)}"/>')

    for n, tag in enumerate(seen):
        ly = MARGIN + 15 + 16 * n
        lx = width - MARGIN - 110
        parts.append(f'  <circle cx="{lx:.2f}" cy="{ly - 4:.2f}" r="4" fill="{CLASS_COLORS.get(tag, DEFAULT_COLOR)}"/>')
        parts.append(f'  <text x="{lx + 10:.2f}" y="{ly:.2f}" font-size="11">{escape(str(tag))}</text>')
    if title:
        parts.append(f'  <text x="{0.5 * width:.2f}" y="{0.5 * MARGIN:.2f}" font-size="14" '
                     f'text-anchor="middle">{escape(title)}</text>')
    parts.append('</svg>')
    return '\n'.join(parts) + '\n'


def plot_records(path, records, envelope=None, title=None):
    """Write the scatter of scan records to `path`."""
    text = ratio_svg(((r.x, r.y, r.class_tag) for r in records), envelope, title)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(text)
    logger.info('wrote %s', path)
    return path
