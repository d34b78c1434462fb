// Item-token presentation: "<property key>|<part>|<marker>" rendered with
// the marker as a glyph and the part as a column grouping.

export type Part = "pb" | "sol";
export type Marker = "-" | "=" | "+";

export interface ItemView {
  key: string;
  part: Part;
  marker: Marker;
}

const MARKER_GLYPH: Record<Marker, string> = { "-": "−", "=": "=", "+": "+" };
const MARKER_CLASS: Record<Marker, string> = {
  "-": "marker-minus",
  "=": "marker-equal",
  "+": "marker-plus",
};

/** Property keys may contain spaces but never '|'; the part and marker are
 * always the last two segments. */
export function splitToken(token: string): ItemView {
  const second = token.lastIndexOf("|");
  const first = token.lastIndexOf("|", second - 1);
  if (first <= 0 || second <= first) throw new Error(`malformed item token: ${token}`);
  const key = token.slice(0, first);
  const part = token.slice(first + 1, second);
  const marker = token.slice(second + 1);
  if (part !== "pb" && part !== "sol") throw new Error(`bad part in token: ${token}`);
  if (marker !== "-" && marker !== "=" && marker !== "+")
    throw new Error(`bad marker in token: ${token}`);
  return { key, part, marker };
}

export function markerGlyph(marker: Marker): string {
  return MARKER_GLYPH[marker];
}

export function markerClass(marker: Marker): string {
  return MARKER_CLASS[marker];
}

export function byPart(tokens: string[]): { pb: ItemView[]; sol: ItemView[] } {
  const pb: ItemView[] = [];
  const sol: ItemView[] = [];
  for (const token of tokens) {
    const item = splitToken(token);
    (item.part === "pb" ? pb : sol).push(item);
  }
  return { pb, sol };
}

export function supportPercent(support: number): string {
  return `${(support * 100).toFixed(1)}%`;
}

const HTML_ESCAPES: Record<string, string> = {
  "&": "&amp;",
  "<": "&lt;",
  ">": "&gt;",
  '"': "&quot;",
  "'": "&#39;",
};

export function escapeHtml(text: string): string {
  return text.replace(/[&<>"']/g, (ch) => HTML_ESCAPES[ch] ?? ch);
}

export function itemSpan(item: ItemView): string {
  return (
    `<span class="item ${markerClass(item.marker)}">` +
    `<span class="glyph">${markerGlyph(item.marker)}</span>` +
    `${escapeHtml(item.key)}</span>`
  );
}
