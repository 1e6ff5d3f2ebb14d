// Metrics dashboard: four summary tiles plus the intent confusion
// heatmap. Pure DOM construction — hand the container a report, get the
// rendered panel back. Null metrics render as "n/a" with the denominator
// spelled out so an empty session doesn't look like a broken one.

import { MetricsReport } from "./schema";

/** 75 -> "75.0", 88.89 -> "88.89". Keeps at least one decimal. */
export function formatPct(value: number): string {
  const fixed = value.toFixed(2);
  return fixed.endsWith("0") ? fixed.slice(0, -1) : fixed;
}

interface TileSpec {
  key: "vcua_pct" | "nsr_pct" | "oia_pct" | "art_s";
  title: string;
  denKey: string;
  denNoun: string;
}

const TILES: TileSpec[] = [
  { key: "vcua_pct", title: "VCUA", denKey: "vcua_den", denNoun: "vocal annotated turns" },
  { key: "nsr_pct", title: "NSR", denKey: "nsr_den", denNoun: "navigation commands" },
  { key: "oia_pct", title: "OIA", denKey: "oia_den", denNoun: "scene/object queries" },
  { key: "art_s", title: "ART", denKey: "art_den", denNoun: "acted turns" },
];

function tileValue(spec: TileSpec, report: MetricsReport): string {
  const value = report[spec.key];
  if (value === null) {
    const den = report.counts[spec.denKey] ?? 0;
    return `n/a (${den} ${spec.denNoun})`;
  }
  if (spec.key === "art_s") return `${(value * 1000).toFixed(1)} ms`;
  return `${formatPct(value)}%`;
}

function heatColor(count: number, max: number, onDiagonal: boolean): string {
  if (count === 0) return "transparent";
  const alpha = 0.25 + 0.75 * (count / Math.max(max, 1));
  return onDiagonal
    ? `rgba(46, 125, 50, ${alpha.toFixed(3)})`
    : `rgba(198, 40, 40, ${alpha.toFixed(3)})`;
}

export function renderDashboard(
  container: HTMLElement,
  report: MetricsReport | null,
): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  if (!report) {
    const empty = doc.createElement("p");
    empty.className = "dash-empty";
    empty.textContent = "no metrics yet";
    container.appendChild(empty);
    return;
  }

  const tiles = doc.createElement("div");
  tiles.className = "tiles";
  for (const spec of TILES) {
    const tile = doc.createElement("div");
    tile.className = "tile";
    tile.dataset.metric = spec.title.toLowerCase();
    const h = doc.createElement("h3");
    h.textContent = spec.title;
    const v = doc.createElement("div");
    v.className = "tile-value";
    v.textContent = tileValue(spec, report);
    const d = doc.createElement("div");
    d.className = "tile-den";
    const den = report.counts[spec.denKey] ?? 0;
    d.textContent = `${den} ${spec.denNoun}`;
    tile.append(h, v, d);
    tiles.appendChild(tile);
  }
  container.appendChild(tiles);

  // confusion heatmap, rows = true label, cols = predicted
  const max = Math.max(1, ...report.confusion.flat());
  const table = doc.createElement("table");
  table.className = "heatmap";
  const head = doc.createElement("tr");
  head.appendChild(doc.createElement("th"));
  for (const label of report.labels) {
    const th = doc.createElement("th");
    th.textContent = label.slice(0, 4);
    th.title = label;
    head.appendChild(th);
  }
  table.appendChild(head);
  report.labels.forEach((rowLabel, r) => {
    const tr = doc.createElement("tr");
    const th = doc.createElement("th");
    th.textContent = rowLabel;
    tr.appendChild(th);
    report.confusion[r].forEach((count, c) => {
      const td = doc.createElement("td");
      td.dataset.count = String(count);
      td.className = r === c ? "diag" : "off";
      td.style.backgroundColor = heatColor(count, max, r === c);
      td.textContent = count > 0 ? String(count) : "";
      tr.appendChild(td);
    });
    table.appendChild(tr);
  });
  const caption = doc.createElement("p");
  caption.className = "heatmap-caption";
  caption.textContent = "intent confusion (rows true, cols predicted)";
  container.append(caption, table);
}
