"""
Simple line plots and histograms drawn with Cairo.
"""

import cairocffi as cairo

import numpy as np


def nice_ticks(lo, hi, count=5):
	"""
	Round tick positions covering [lo, hi], roughly ``count`` of them.
	"""
	if not np.isfinite(lo) or not np.isfinite(hi):
		return []
	if hi <= lo:
		return [lo]
	raw = (hi - lo) / float(count)
	magnitude = 10.0 ** np.floor(np.log10(raw))
	for factor in (1.0, 2.0, 2.5, 5.0, 10.0):
		step = factor * magnitude
		if step >= raw:
			break
	first = np.ceil(lo / step) * step
	return [t for t in np.arange(first, hi + 0.5 * step, step)
	        if lo - 1e-12 <= t <= hi + 1e-12]


class Plot(object):
	"""
	A two-dimensional plot: any number of line series and bar sets on common
	axes.
	"""

	# Colours
	#                 R    G    B    A
	AXIS_COLOUR    = (0.0, 0.0, 0.0, 1.0)
	GRID_COLOUR    = (0.85, 0.85, 0.85, 1.0)
	BAR_COLOUR     = (0.6, 0.7, 0.9, 1.0)

	# Default line colours, cycled through
	LINE_COLOURS = [
		(0.12, 0.47, 0.71, 1.0),
		(1.00, 0.50, 0.05, 1.0),
		(0.17, 0.63, 0.17, 1.0),
		(0.84, 0.15, 0.16, 1.0),
		(0.58, 0.40, 0.74, 1.0),
	]

	# Margins around the plot area (fraction of the surface size)
	MARGIN = 0.12

	def __init__(self, title="", x_label="", y_label=""):
		self.title = title
		self.x_label = x_label
		self.y_label = y_label

		# [(x, y, rgba, width, label), ...]
		self.lines = []

		# [(edges, heights, rgba), ...]
		self.bars = []

	def add_line(self, x, y, rgba=None, width=1.0, label=None):
		"""Add a line through the points (x, y); NaNs break the line."""
		if rgba is None:
			rgba = self.LINE_COLOURS[len(self.lines) % len(self.LINE_COLOURS)]
		self.lines.append((np.asarray(x, dtype=float),
		                   np.asarray(y, dtype=float), rgba, width, label))

	def add_bars(self, edges, heights, rgba=None):
		"""Add a histogram with the given bin edges."""
		self.bars.append((np.asarray(edges, dtype=float),
		                  np.asarray(heights, dtype=float),
		                  self.BAR_COLOUR if rgba is None else rgba))

	def limits(self):
		"""((x_min, x_max), (y_min, y_max)) of everything added."""
		xs = [x for x, _, _, _, _ in self.lines]
		ys = [y for _, y, _, _, _ in self.lines]
		for edges, heights, _ in self.bars:
			xs.append(edges)
			ys.append(heights)
			ys.append(np.zeros(1))
		if not xs:
			return (0.0, 1.0), (0.0, 1.0)
		x = np.concatenate(xs)
		y = np.concatenate(ys)
		x = x[np.isfinite(x)]
		y = y[np.isfinite(y)]
		if len(x) == 0 or len(y) == 0:
			return (0.0, 1.0), (0.0, 1.0)
		x_lim = (x.min(), x.max())
		y_lim = (y.min(), y.max())
		if x_lim[0] == x_lim[1]:
			x_lim = (x_lim[0] - 0.5, x_lim[1] + 0.5)
		if y_lim[0] == y_lim[1]:
			y_lim = (y_lim[0] - 0.5, y_lim[1] + 0.5)
		return x_lim, y_lim

	def _text(self, ctx, string, x, y, size, alignment=0.5, angle=0.0):
		ctx.save()
		ctx.select_font_face("Sans")
		ctx.set_source_rgba(*self.AXIS_COLOUR)
		ctx.set_font_size(size)
		ctx.move_to(x, y)
		ctx.rotate(angle)
		xb, yb, w, h, _w, _h = ctx.text_extents(string)
		ctx.rel_move_to(-xb - w*alignment, h*0.5)
		ctx.show_text(string)
		ctx.restore()

	def draw(self, ctx, width, height):
		"""
		Draw the plot into a Cairo context covering (0, 0) to (width, height).
		"""
		(x0, x1), (y0, y1) = self.limits()
		left = width * self.MARGIN
		right = width * (1.0 - self.MARGIN / 2.0)
		top = height * self.MARGIN
		bottom = height * (1.0 - self.MARGIN)
		font = height * 0.03

		def px(x):
			return left + (x - x0) / (x1 - x0) * (right - left)

		def py(y):
			return bottom - (y - y0) / (y1 - y0) * (bottom - top)

		# Background
		ctx.save()
		ctx.rectangle(0, 0, width, height)
		ctx.set_source_rgba(1.0, 1.0, 1.0, 1.0)
		ctx.fill()
		ctx.restore()

		# Grid and tick labels
		ctx.save()
		ctx.set_line_width(0.5)
		ctx.set_source_rgba(*self.GRID_COLOUR)
		x_ticks = nice_ticks(x0, x1)
		y_ticks = nice_ticks(y0, y1)
		for t in x_ticks:
			ctx.move_to(px(t), top)
			ctx.line_to(px(t), bottom)
		for t in y_ticks:
			ctx.move_to(left, py(t))
			ctx.line_to(right, py(t))
		ctx.stroke()
		ctx.restore()
		for t in x_ticks:
			self._text(ctx, "{:g}".format(t), px(t), bottom + font, font)
		for t in y_ticks:
			self._text(ctx, "{:g}".format(t), left - font * 0.5, py(t), font,
			           alignment=1.0)

		# Histogram bars
		for edges, heights, rgba in self.bars:
			ctx.save()
			ctx.set_source_rgba(*rgba)
			for lo, hi, h in zip(edges[:-1], edges[1:], heights):
				ctx.rectangle(px(lo), py(h), px(hi) - px(lo), py(0.0) - py(h))
			ctx.fill()
			ctx.restore()

		# Lines
		for x, y, rgba, line_width, _ in self.lines:
			ctx.save()
			ctx.set_line_cap(cairo.LINE_CAP_ROUND)
			ctx.set_line_join(cairo.LINE_JOIN_ROUND)
			ctx.set_source_rgba(*rgba)
			ctx.set_line_width(line_width)
			pen_down = False
			for xi, yi in zip(x, y):
				if not (np.isfinite(xi) and np.isfinite(yi)):
					pen_down = False
					continue
				if pen_down:
					ctx.line_to(px(xi), py(yi))
				else:
					ctx.move_to(px(xi), py(yi))
					pen_down = True
			ctx.stroke()
			ctx.restore()

		# Axes
		ctx.save()
		ctx.set_source_rgba(*self.AXIS_COLOUR)
		ctx.set_line_width(1.0)
		ctx.rectangle(left, top, right - left, bottom - top)
		ctx.stroke()
		ctx.restore()

		# Legend
		for i, (_, _, rgba, _, label) in enumerate(
				l for l in self.lines if l[4] is not None):
			y = top + font * (1.5 + 1.5*i)
			ctx.save()
			ctx.set_source_rgba(*rgba)
			ctx.set_line_width(2.0)
			ctx.move_to(right - font * 8, y)
			ctx.line_to(right - font * 6, y)
			ctx.stroke()
			ctx.restore()
			self._text(ctx, label, right - font * 5.5, y, font, alignment=0.0)

		# Titles
		self._text(ctx, self.title, (left + right) / 2.0, top / 2.0, font * 1.3)
		self._text(ctx, self.x_label, (left + right) / 2.0,
		           bottom + font * 2.5, font)
		self._text(ctx, self.y_label, left - font * 3.5, (top + bottom) / 2.0,
		           font, angle=-np.pi / 2.0)


def series_plot(series, columns, title=""):
	"""A :py:class:`Plot` of some columns of a time series against t."""
	plot = Plot(title, "t (1/omega0)", "")
	for name in columns:
		if name in series and np.any(np.isfinite(series[name])):
			plot.add_line(series.t, series[name], label=name)
	return plot


def histogram_plot(fit, title=""):
	"""A :py:class:`Plot` of a histogram with its fitted Gaussian."""
	plot = Plot(title, "occupation per atom", "density")
	plot.add_bars(fit.bin_edges, fit.density)
	x = np.linspace(fit.bin_edges[0], fit.bin_edges[-1], 200)
	plot.add_line(x, fit.pdf(x), rgba=(0.84, 0.15, 0.16, 1.0), width=1.5,
	              label="gaussian")
	return plot
