/** Reader for the canonical cleaned-corpus JSONL (one post per line). */

export interface CorpusPost {
  userId: string;
  postId: string;
  text: string;
}

export function parseCorpusJsonl(content: string): CorpusPost[] {
  const posts: CorpusPost[] = [];
  const seen = new Set<string>();
  const lines = content.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    let obj: unknown;
    try {
      obj = JSON.parse(line);
    } catch (err) {
      throw new Error(`line ${i + 1}: invalid JSON (${(err as Error).message})`);
    }
    const record = obj as Record<string, unknown>;
    const userId = record.user_id;
    const postId = record.post_id;
    if (typeof userId !== "string" || typeof postId !== "string") {
      throw new Error(`line ${i + 1}: user_id and post_id must be strings`);
    }
    if (seen.has(postId)) {
      throw new Error(`line ${i + 1}: duplicate post_id ${postId}`);
    }
    seen.add(postId);
    const text = typeof record.text === "string" ? record.text : "";
    posts.push({ userId, postId, text });
  }
  return posts;
}
