/**
 * Maps every primitive in a JSON document to its exact source text.
 *
 * The dashboard must display service numbers byte-for-byte, but
 * JSON.parse + String() re-formats them (e.g. "1e-07" becomes "1e-7",
 * "0.6780" becomes "0.678"). This scanner walks the raw response text and
 * records, for each primitive value, the untouched literal keyed by its
 * path ("trace.2.phv", "predictions.0.means.1", ...).
 */

export type RawMap = Map<string, string>;

const WHITESPACE = new Set([" ", "\t", "\n", "\r"]);

class Scanner {
  private pos = 0;

  constructor(private readonly text: string, private readonly out: RawMap) {}

  scan(): void {
    this.skipWhitespace();
    this.value([]);
    this.skipWhitespace();
    if (this.pos !== this.text.length) {
      throw new Error(`trailing characters at offset ${this.pos}`);
    }
  }

  private skipWhitespace(): void {
    while (this.pos < this.text.length && WHITESPACE.has(this.text[this.pos])) {
      this.pos += 1;
    }
  }

  private peek(): string {
    if (this.pos >= this.text.length) {
      throw new Error("unexpected end of JSON text");
    }
    return this.text[this.pos];
  }

  private expect(ch: string): void {
    if (this.peek() !== ch) {
      throw new Error(`expected '${ch}' at offset ${this.pos}, found '${this.peek()}'`);
    }
    this.pos += 1;
  }

  private value(path: string[]): void {
    const ch = this.peek();
    if (ch === "{") {
      this.object(path);
    } else if (ch === "[") {
      this.array(path);
    } else if (ch === '"') {
      this.record(path, this.stringToken());
    } else {
      this.record(path, this.literalToken());
    }
  }

  private record(path: string[], literal: string): void {
    this.out.set(path.join("."), literal);
  }

  private object(path: string[]): void {
    this.expect("{");
    this.skipWhitespace();
    if (this.peek() === "}") {
      this.pos += 1;
      return;
    }
    for (;;) {
      this.skipWhitespace();
      const rawKey = this.stringToken();
      const key = JSON.parse(rawKey) as string;
      this.skipWhitespace();
      this.expect(":");
      this.skipWhitespace();
      path.push(key);
      this.value(path);
      path.pop();
      this.skipWhitespace();
      if (this.peek() === ",") {
        this.pos += 1;
        continue;
      }
      this.expect("}");
      return;
    }
  }

  private array(path: string[]): void {
    this.expect("[");
    this.skipWhitespace();
    if (this.peek() === "]") {
      this.pos += 1;
      return;
    }
    let index = 0;
    for (;;) {
      this.skipWhitespace();
      path.push(String(index));
      this.value(path);
      path.pop();
      index += 1;
      this.skipWhitespace();
      if (this.peek() === ",") {
        this.pos += 1;
        continue;
      }
      this.expect("]");
      return;
    }
  }

  private stringToken(): string {
    const start = this.pos;
    this.expect('"');
    while (this.peek() !== '"') {
      if (this.peek() === "\\") {
        this.pos += 2;
      } else {
        this.pos += 1;
      }
    }
    this.pos += 1;
    return this.text.slice(start, this.pos);
  }

  private literalToken(): string {
    const start = this.pos;
    while (this.pos < this.text.length) {
      const ch = this.text[this.pos];
      if (ch === "," || ch === "}" || ch === "]" || WHITESPACE.has(ch)) {
        break;
      }
      this.pos += 1;
    }
    if (this.pos === start) {
      throw new Error(`empty literal at offset ${start}`);
    }
    return this.text.slice(start, this.pos);
  }
}

/** Scan a JSON document into a path -> raw literal map. */
export function extractRawLiterals(text: string): RawMap {
  const out: RawMap = new Map();
  new Scanner(text, out).scan();
  return out;
}

/**
 * Raw literal at a path, or null when the path holds no primitive.
 * Strings come back unquoted (decoded); numbers/booleans/null untouched.
 */
export function rawAt(map: RawMap, path: string): string | null {
  const literal = map.get(path);
  if (literal === undefined) {
    return null;
  }
  if (literal.startsWith('"')) {
    return JSON.parse(literal) as string;
  }
  return literal;
}
