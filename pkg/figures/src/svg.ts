/**
 * Minimal SVG plotting: linear scales, nice ticks, panels with axes,
 * polylines, display-only splines, markers and vertical guide lines.
 */

export interface Panel {
  x: number;
  y: number;
  width: number;
  height: number;
  xRange: [number, number];
  yRange: [number, number];
  title: string;
  xLabel: string;
  yLabel: string;
  body: string[];
}

const MARGIN = { left: 58, right: 14, top: 30, bottom: 42 };

export function niceTicks(lo: number, hi: number, target = 5): number[] {
  if (!(hi > lo)) {
    return [lo];
  }
  const span = hi - lo;
  const raw = span / target;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const norm = raw / mag;
  const step = (norm < 1.5 ? 1 : norm < 3.5 ? 2 : norm < 7.5 ? 5 : 10) * mag;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-12 * span; v += step) {
    ticks.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return ticks;
}

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1);
  return String(Math.round(v * 1e6) / 1e6);
}

export function padRange(lo: number, hi: number, frac = 0.06): [number, number] {
  if (!(hi > lo)) {
    const pad = Math.abs(lo) > 0 ? 0.1 * Math.abs(lo) : 1.0;
    return [lo - pad, hi + pad];
  }
  const pad = frac * (hi - lo);
  return [lo - pad, hi + pad];
}

export class PanelBuilder {
  readonly panel: Panel;

  constructor(panel: Panel) {
    this.panel = panel;
  }

  sx(v: number): number {
    const { x, width, xRange } = this.panel;
    return x + MARGIN.left + ((v - xRange[0]) / (xRange[1] - xRange[0]))
      * (width - MARGIN.left - MARGIN.right);
  }

  sy(v: number): number {
    const { y, height, yRange } = this.panel;
    return y + height - MARGIN.bottom - ((v - yRange[0]) / (yRange[1] - yRange[0]))
      * (height - MARGIN.top - MARGIN.bottom);
  }

  inX(v: number): boolean {
    return v >= this.panel.xRange[0] && v <= this.panel.xRange[1];
  }

  line(pts: Array<[number, number]>, color: string, width = 1.3): void {
    if (pts.length < 2) return;
    const d = pts.map(([a, b], i) => `${i === 0 ? "M" : "L"}${this.sx(a).toFixed(2)} ${this.sy(b).toFixed(2)}`).join(" ");
    this.panel.body.push(`<path d="${d}" fill="none" stroke="${color}" stroke-width="${width}"/>`);
  }

  /** Catmull-Rom through the points, rendered as cubic Beziers (display only). */
  spline(pts: Array<[number, number]>, color: string, width = 1.3): void {
    if (pts.length < 3) {
      this.line(pts, color, width);
      return;
    }
    const px = pts.map((p) => this.sx(p[0]));
    const py = pts.map((p) => this.sy(p[1]));
    let d = `M${px[0].toFixed(2)} ${py[0].toFixed(2)}`;
    for (let i = 0; i < pts.length - 1; i++) {
      const x0 = px[Math.max(i - 1, 0)], y0 = py[Math.max(i - 1, 0)];
      const x1 = px[i], y1 = py[i];
      const x2 = px[i + 1], y2 = py[i + 1];
      const x3 = px[Math.min(i + 2, pts.length - 1)], y3 = py[Math.min(i + 2, pts.length - 1)];
      const c1x = x1 + (x2 - x0) / 6, c1y = y1 + (y2 - y0) / 6;
      const c2x = x2 - (x3 - x1) / 6, c2y = y2 - (y3 - y1) / 6;
      d += ` C${c1x.toFixed(2)} ${c1y.toFixed(2)}, ${c2x.toFixed(2)} ${c2y.toFixed(2)}, ${x2.toFixed(2)} ${y2.toFixed(2)}`;
    }
    this.panel.body.push(`<path d="${d}" fill="none" stroke="${color}" stroke-width="${width}"/>`);
  }

  markers(pts: Array<[number, number]>, color: string, r = 2.6): number {
    for (const [a, b] of pts) {
      this.panel.body.push(
        `<circle cx="${this.sx(a).toFixed(2)}" cy="${this.sy(b).toFixed(2)}" r="${r}" `
        + `fill="none" stroke="${color}" stroke-width="1.1" class="marker"/>`,
      );
    }
    return pts.length;
  }

  vline(xv: number, color = "#888", dash = "4 3"): void {
    const x = this.sx(xv).toFixed(2);
    const yTop = this.panel.y + MARGIN.top;
    const yBot = this.panel.y + this.panel.height - MARGIN.bottom;
    this.panel.body.push(
      `<line x1="${x}" y1="${yTop}" x2="${x}" y2="${yBot}" stroke="${color}" `
      + `stroke-width="1" stroke-dasharray="${dash}" class="guide"/>`,
    );
  }

  frame(): string[] {
    const p = this.panel;
    const x0 = p.x + MARGIN.left, x1 = p.x + p.width - MARGIN.right;
    const y0 = p.y + MARGIN.top, y1 = p.y + p.height - MARGIN.bottom;
    const out = [
      `<rect x="${x0}" y="${y0}" width="${x1 - x0}" height="${y1 - y0}" fill="none" stroke="#333" stroke-width="1"/>`,
      `<text x="${(x0 + x1) / 2}" y="${p.y + 18}" text-anchor="middle" font-size="13" font-weight="bold">${p.title}</text>`,
      `<text x="${(x0 + x1) / 2}" y="${y1 + 32}" text-anchor="middle" font-size="12">${p.xLabel}</text>`,
      `<text x="${p.x + 14}" y="${(y0 + y1) / 2}" text-anchor="middle" font-size="12" transform="rotate(-90 ${p.x + 14} ${(y0 + y1) / 2})">${p.yLabel}</text>`,
    ];
    for (const t of niceTicks(p.xRange[0], p.xRange[1])) {
      const x = this.sx(t).toFixed(2);
      out.push(`<line x1="${x}" y1="${y1}" x2="${x}" y2="${y1 + 4}" stroke="#333"/>`);
      out.push(`<text x="${x}" y="${y1 + 16}" text-anchor="middle" font-size="10">${fmtTick(t)}</text>`);
    }
    for (const t of niceTicks(p.yRange[0], p.yRange[1])) {
      const y = this.sy(t).toFixed(2);
      out.push(`<line x1="${x0 - 4}" y1="${y}" x2="${x0}" y2="${y}" stroke="#333"/>`);
      out.push(`<text x="${x0 - 6}" y="${y}" text-anchor="end" dominant-baseline="middle" font-size="10">${fmtTick(t)}</text>`);
    }
    return out;
  }
}

export function newPanel(
  x: number, y: number, width: number, height: number,
  xRange: [number, number], yRange: [number, number],
  title: string, xLabel: string, yLabel: string,
): PanelBuilder {
  return new PanelBuilder({ x, y, width, height, xRange, yRange, title, xLabel, yLabel, body: [] });
}

export function assemble(width: number, height: number, panels: PanelBuilder[]): string {
  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" `
    + `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
  ];
  for (const pb of panels) {
    parts.push(...pb.panel.body, ...pb.frame());
  }
  parts.push("</svg>");
  return parts.join("\n");
}
