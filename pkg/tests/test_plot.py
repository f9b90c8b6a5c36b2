from eigratio.analytic import rectangle_spectrum
from eigratio.bounds import envelope_curve
from eigratio.plot import plot_records, ratio_svg
from eigratio.scan import ScanRecord


def test_svg_deterministic():
    points = [(1.6, 2.6, 'rectangle'), (2.0, 3.0, 'triangle'), (1.3, 2.2, 'rectangle')]
    text = ratio_svg(points, title='a & b')
    assert text == ratio_svg(points, title='a & b')
    assert text.startswith('<svg')
    assert text.rstrip().endswith('</svg>')
    # three points plus two legend entries
    assert text.count('<circle') == 5
    assert 'a &amp; b' in text


def test_svg_skips_nonfinite():
    text = ratio_svg([(float('nan'), 2.0, 'star'), (1.5, float('inf'), 'star')])
    assert '<circle' not in text


def test_svg_envelope():
    curve = envelope_curve(0.05)
    text = ratio_svg([], envelope=curve)
    assert 'stroke="#c00"' in text


def test_plot_records(tmp_path):
    records = [ScanRecord(i, 'rectangle', (('a', a),), None, tuple(rectangle_spectrum(a, 4)), 0, 0.0)
               for i, a in enumerate([1.0, 1.5, 2.0])]
    path = tmp_path / 'ratios.svg'
    assert plot_records(str(path), records) == str(path)
    assert path.read_text().count('fill="#1f77b4"') == 4
