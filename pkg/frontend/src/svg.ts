// Minimal deterministic SVG scene builder.  Every data series embeds its
// raw values as data-* attributes (shortest round-trip decimal), so tests
// and downstream tools can recover the plotted numbers exactly.

export interface Margin {
  top: number;
  right: number;
  bottom: number;
  left: number;
}

export const PALETTE = [
  "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

export function linearScale(
  domainMin: number,
  domainMax: number,
  rangeMin: number,
  rangeMax: number,
): (value: number) => number {
  const span = domainMax - domainMin;
  return (value: number) => {
    const fraction = span === 0 ? 0.5 : (value - domainMin) / span;
    return rangeMin + fraction * (rangeMax - rangeMin);
  };
}

export function ticks(min: number, max: number, count: number): number[] {
  if (min === max) return [min];
  const rawStep = (max - min) / Math.max(count - 1, 1);
  const power = Math.floor(Math.log10(rawStep));
  const base = 10 ** power;
  const step = [1, 2, 5, 10].map((m) => m * base).find((s) => s >= rawStep) ?? base * 10;
  const start = Math.ceil(min / step) * step;
  const values: number[] = [];
  for (let v = start; v <= max + step * 1e-9; v += step) {
    values.push(Number(v.toPrecision(12)));
  }
  return values;
}

const px = (value: number): string => value.toFixed(2);

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export class SvgScene {
  private parts: string[] = [];
  private rootAttrs: string[] = [];

  constructor(
    readonly width: number,
    readonly height: number,
  ) {}

  attr(name: string, value: string): void {
    this.rootAttrs.push(`${name}="${escapeXml(value)}"`);
  }

  rect(x: number, y: number, w: number, h: number, fill: string, extra = ""): void {
    this.parts.push(
      `<rect x="${px(x)}" y="${px(y)}" width="${px(w)}" height="${px(h)}" fill="${fill}"${extra ? " " + extra : ""}/>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, extra = ""): void {
    this.parts.push(
      `<line x1="${px(x1)}" y1="${px(y1)}" x2="${px(x2)}" y2="${px(y2)}" stroke="${stroke}"${extra ? " " + extra : ""}/>`,
    );
  }

  polyline(points: Array<[number, number]>, stroke: string, extra = ""): void {
    const path = points.map(([x, y]) => `${px(x)},${px(y)}`).join(" ");
    this.parts.push(
      `<polyline fill="none" stroke="${stroke}" stroke-width="1.5" points="${path}"${extra ? " " + extra : ""}/>`,
    );
  }

  circle(cx: number, cy: number, r: number, fill: string): void {
    this.parts.push(`<circle cx="${px(cx)}" cy="${px(cy)}" r="${px(r)}" fill="${fill}"/>`);
  }

  text(x: number, y: number, content: string, extra = ""): void {
    this.parts.push(
      `<text x="${px(x)}" y="${px(y)}" font-family="sans-serif"${extra ? " " + extra : ""}>${escapeXml(content)}</text>`,
    );
  }

  raw(markup: string): void {
    this.parts.push(markup);
  }

  render(): string {
    const attrs = this.rootAttrs.length ? " " + this.rootAttrs.join(" ") : "";
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}"${attrs}>`,
      `<rect x="0" y="0" width="${this.width}" height="${this.height}" fill="white"/>`,
      ...this.parts,
      "</svg>",
    ].join("\n");
  }
}

export function dataAttr(values: number[]): string {
  return values.map((v) => String(v)).join(" ");
}
