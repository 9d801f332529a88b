export { CsvError, parseCsvFile, requireColumns } from "./csv.js";
export {
  buildBitsCurve,
  buildMetricBars,
  buildRateCurve,
  renderBarFigure,
  renderLineFigure,
  renderToString,
  TAU_ZERO,
} from "./figures.js";
export type { BarFigure, FigureKind, LineFigure, PlotSpec, Series } from "./figures.js";
export { render } from "./render.js";
