import { writeFileSync } from "node:fs";
import { PlotSpec, renderToString } from "./figures.js";

/** Render a figure to its output path.  The SVG is built entirely before
 * anything is written, so a failing spec leaves no partial image. */
export function render(spec: PlotSpec): void {
  const svg = renderToString(spec);
  writeFileSync(spec.outPath, svg + "\n", "utf8");
}
