/** Structured text records: `key: value` headers, a blank line, a body.
 *
 * Mirrors the service protocol exactly; field names are a compatibility
 * surface shared with the backend.
 */

export interface Record {
  fields: { [key: string]: string };
  body: string;
}

export function parseRecord(text: string): Record {
  const sep = text.indexOf("\n\n");
  const head = sep >= 0 ? text.slice(0, sep) : text;
  const body = sep >= 0 ? text.slice(sep + 2) : "";
  const fields: { [key: string]: string } = {};
  for (const line of head.split("\n")) {
    if (!line.trim()) continue;
    const colon = line.indexOf(":");
    if (colon < 0) throw new Error(`bad header line ${JSON.stringify(line)}`);
    fields[line.slice(0, colon).trim()] = line.slice(colon + 1).trim();
  }
  return { fields, body };
}

export function renderRecord(fields: { [key: string]: string }, body = ""): string {
  const lines = Object.entries(fields).map(([k, v]) => `${k}: ${v}`);
  let text = lines.join("\n") + "\n";
  if (body) {
    text += "\n" + body;
    if (!text.endsWith("\n")) text += "\n";
  }
  return text;
}
