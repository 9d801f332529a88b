// The three figure kinds rendered from the experiment harness CSVs.
//
// rate_curve    pep_rates.csv     worst-case rate tau versus delta, one
//                                 line per (method, shortened), with the
//                                 zero-iteration baseline drawn at 2
// bits_curve    compress_demo.csv loss versus cumulative bits, one line
//                                 per precision variant
// metric_bars   report.csv        one metric as grouped bars over delta,
//                                 one bar per (method, shortened)
//
// Rendering never recomputes: plotted values are exactly the CSV values,
// in CSV row order, and each series carries them verbatim in data-x /
// data-y attributes.

import { CsvError, CsvTable, numeric, parseCsvFile, requireColumns } from "./csv.js";
import { PALETTE, SvgScene, dataAttr, linearScale, ticks } from "./svg.js";

export type FigureKind = "bits_curve" | "rate_curve" | "metric_bars";

export interface PlotSpec {
  csvPath: string;
  kind: FigureKind;
  outPath: string;
  /** metric_bars only: which report column to draw */
  metric?: string;
}

export interface Series {
  label: string;
  xs: number[];
  ys: number[];
}

export interface LineFigure {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  baseline?: { value: number; label: string };
  logY?: boolean;
}

export interface BarFigure {
  title: string;
  xLabel: string;
  yLabel: string;
  groups: string[];
  bars: Array<{ label: string; values: number[] }>;
}

export const TAU_ZERO = 2.0;

const variantLabel = (method: string, shortened: string): string =>
  shortened === "true" ? `${method} (shortened)` : method;

function groupSeries(
  rows: Record<string, string>[],
  key: (row: Record<string, string>) => string,
  x: string,
  y: string,
): Series[] {
  const order: string[] = [];
  const byLabel = new Map<string, Series>();
  for (const row of rows) {
    const label = key(row);
    let series = byLabel.get(label);
    if (!series) {
      series = { label, xs: [], ys: [] };
      byLabel.set(label, series);
      order.push(label);
    }
    series.xs.push(numeric(row, x));
    series.ys.push(numeric(row, y));
  }
  return order.map((label) => byLabel.get(label)!);
}

export function buildRateCurve(table: CsvTable, path: string): LineFigure {
  requireColumns(table, ["method", "delta", "shortened", "tau"], path);
  const solved = table.rows.filter(
    (row) =>
      row.method !== "tau0_baseline" &&
      (!("status" in row) || row.status === "optimal" || row.status === "near_optimal"),
  );
  if (solved.length === 0) {
    throw new CsvError(`${path}: no solved rate rows to plot`);
  }
  return {
    title: "Worst-case rate versus inexactness level",
    xLabel: "delta",
    yLabel: "tau",
    series: groupSeries(solved, (r) => variantLabel(r.method, r.shortened), "delta", "tau"),
    baseline: { value: TAU_ZERO, label: "tau_0 = 2 (no iterations)" },
  };
}

export function buildBitsCurve(table: CsvTable, path: string): LineFigure {
  requireColumns(table, ["variant", "total_bits", "loss"], path);
  return {
    title: "Loss versus total bits allocated",
    xLabel: "total bits",
    yLabel: "loss",
    series: groupSeries(table.rows, (r) => r.variant, "total_bits", "loss"),
  };
}

export function buildMetricBars(
  table: CsvTable,
  path: string,
  metric = "mean_best_grad_norm_sq",
): BarFigure {
  requireColumns(table, ["method", "shortened", "delta", metric], path);
  const groups: string[] = [];
  for (const row of table.rows) {
    if (!groups.includes(row.delta)) groups.push(row.delta);
  }
  const barOrder: string[] = [];
  const values = new Map<string, Map<string, number>>();
  for (const row of table.rows) {
    const label = variantLabel(row.method, row.shortened);
    if (!values.has(label)) {
      values.set(label, new Map());
      barOrder.push(label);
    }
    values.get(label)!.set(row.delta, numeric(row, metric));
  }
  return {
    title: `${metric} by inexactness level`,
    xLabel: "delta",
    yLabel: metric,
    groups,
    bars: barOrder.map((label) => ({
      label,
      values: groups.map((g) => values.get(label)!.get(g) ?? NaN),
    })),
  };
}

const WIDTH = 720;
const HEIGHT = 440;
const MARGIN = { top: 40, right: 160, bottom: 48, left: 64 };

function plotArea() {
  return {
    left: MARGIN.left,
    top: MARGIN.top,
    width: WIDTH - MARGIN.left - MARGIN.right,
    height: HEIGHT - MARGIN.top - MARGIN.bottom,
  };
}

function axes(
  scene: SvgScene,
  xScale: (v: number) => number,
  yScale: (v: number) => number,
  xDomain: [number, number],
  yDomain: [number, number],
  figure: { title: string; xLabel: string; yLabel: string },
): void {
  const area = plotArea();
  const bottom = area.top + area.height;
  scene.line(area.left, bottom, area.left + area.width, bottom, "#333");
  scene.line(area.left, area.top, area.left, bottom, "#333");
  for (const tick of ticks(xDomain[0], xDomain[1], 6)) {
    const x = xScale(tick);
    scene.line(x, bottom, x, bottom + 4, "#333");
    scene.text(x, bottom + 18, String(tick), 'font-size="11" text-anchor="middle"');
  }
  for (const tick of ticks(yDomain[0], yDomain[1], 6)) {
    const y = yScale(tick);
    scene.line(area.left - 4, y, area.left, y, "#333");
    scene.text(area.left - 8, y + 4, String(tick), 'font-size="11" text-anchor="end"');
    scene.line(area.left, y, area.left + area.width, y, "#eee");
  }
  scene.text(WIDTH / 2, 22, figure.title, 'font-size="14" text-anchor="middle"');
  scene.text(
    area.left + area.width / 2,
    HEIGHT - 12,
    figure.xLabel,
    'font-size="12" text-anchor="middle"',
  );
  scene.text(
    16,
    area.top - 10,
    figure.yLabel,
    'font-size="12" text-anchor="start"',
  );
}

function legend(scene: SvgScene, labels: string[]): void {
  const area = plotArea();
  labels.forEach((label, index) => {
    const y = area.top + 14 * index;
    const x = area.left + area.width + 12;
    scene.rect(x, y - 8, 10, 10, PALETTE[index % PALETTE.length]);
    scene.text(x + 14, y + 1, label, 'font-size="11"');
  });
}

export function renderLineFigure(figure: LineFigure): string {
  const allX = figure.series.flatMap((s) => s.xs).filter(Number.isFinite);
  const allY = figure.series.flatMap((s) => s.ys).filter(Number.isFinite);
  if (allX.length === 0) {
    throw new CsvError("nothing to plot: no finite data points");
  }
  const yCandidates = figure.baseline ? [...allY, figure.baseline.value] : allY;
  const xDomain: [number, number] = [Math.min(...allX), Math.max(...allX)];
  const yDomain: [number, number] = [
    Math.min(0, Math.min(...yCandidates)),
    Math.max(...yCandidates) * 1.05,
  ];
  const area = plotArea();
  const xScale = linearScale(xDomain[0], xDomain[1], area.left, area.left + area.width);
  const yScale = linearScale(yDomain[0], yDomain[1], area.top + area.height, area.top);

  const scene = new SvgScene(WIDTH, HEIGHT);
  scene.attr("data-x-domain", dataAttr(xDomain));
  scene.attr("data-y-domain", dataAttr(yDomain));
  scene.attr(
    "data-plot-area",
    dataAttr([area.left, area.top, area.width, area.height]),
  );
  axes(scene, xScale, yScale, xDomain, yDomain, figure);
  if (figure.baseline) {
    const y = yScale(figure.baseline.value);
    scene.line(
      area.left,
      y,
      area.left + area.width,
      y,
      "#555",
      `stroke-dasharray="6 4" class="baseline" data-value="${figure.baseline.value}"`,
    );
    scene.text(
      area.left + 6,
      y - 6,
      figure.baseline.label,
      'font-size="11" fill="#555"',
    );
  }
  figure.series.forEach((series, index) => {
    const color = PALETTE[index % PALETTE.length];
    const points = series.xs.map(
      (x, i) => [xScale(x), yScale(series.ys[i])] as [number, number],
    );
    scene.polyline(
      points,
      color,
      `class="series" data-label="${series.label}" data-x="${dataAttr(series.xs)}" data-y="${dataAttr(series.ys)}"`,
    );
    points.forEach(([x, y]) => scene.circle(x, y, 2.4, color));
  });
  legend(scene, figure.series.map((s) => s.label));
  return scene.render();
}

export function renderBarFigure(figure: BarFigure): string {
  const finite = figure.bars.flatMap((b) => b.values).filter(Number.isFinite);
  if (finite.length === 0) {
    throw new CsvError("nothing to plot: no finite bar values");
  }
  const yDomain: [number, number] = [0, Math.max(...finite) * 1.05];
  const area = plotArea();
  const yScale = linearScale(yDomain[0], yDomain[1], area.top + area.height, area.top);
  const groupWidth = area.width / figure.groups.length;
  const barWidth = (groupWidth * 0.8) / figure.bars.length;

  const scene = new SvgScene(WIDTH, HEIGHT);
  scene.attr("data-y-domain", dataAttr(yDomain));
  scene.attr("data-groups", figure.groups.join(" "));
  const bottom = area.top + area.height;
  scene.line(area.left, bottom, area.left + area.width, bottom, "#333");
  scene.line(area.left, area.top, area.left, bottom, "#333");
  for (const tick of ticks(yDomain[0], yDomain[1], 6)) {
    const y = yScale(tick);
    scene.line(area.left - 4, y, area.left, y, "#333");
    scene.text(area.left - 8, y + 4, String(tick), 'font-size="11" text-anchor="end"');
  }
  figure.groups.forEach((group, g) => {
    const x0 = area.left + g * groupWidth + groupWidth * 0.1;
    scene.text(
      area.left + (g + 0.5) * groupWidth,
      bottom + 18,
      group,
      'font-size="11" text-anchor="middle"',
    );
    figure.bars.forEach((bar, b) => {
      const value = bar.values[g];
      if (!Number.isFinite(value)) return;
      const y = yScale(value);
      scene.rect(
        x0 + b * barWidth,
        y,
        barWidth * 0.92,
        bottom - y,
        PALETTE[b % PALETTE.length],
        `class="bar" data-label="${bar.label}" data-group="${group}" data-value="${String(value)}"`,
      );
    });
  });
  scene.text(WIDTH / 2, 22, figure.title, 'font-size="14" text-anchor="middle"');
  scene.text(
    area.left + area.width / 2,
    HEIGHT - 12,
    figure.xLabel,
    'font-size="12" text-anchor="middle"',
  );
  scene.text(16, area.top - 10, figure.yLabel, 'font-size="12" text-anchor="start"');
  legend(scene, figure.bars.map((b) => b.label));
  return scene.render();
}

export function renderToString(spec: PlotSpec): string {
  const table = parseCsvFile(spec.csvPath);
  switch (spec.kind) {
    case "rate_curve":
      return renderLineFigure(buildRateCurve(table, spec.csvPath));
    case "bits_curve":
      return renderLineFigure(buildBitsCurve(table, spec.csvPath));
    case "metric_bars":
      return renderBarFigure(buildMetricBars(table, spec.csvPath, spec.metric));
    default:
      throw new CsvError(`unknown figure kind: ${String(spec.kind)}`);
  }
}
