import type { ApiClient } from './api';
import type { ChatMessage } from './types';

export interface PendingMessage {
  localId: number;
  body: string;
}

export interface ChatCallbacks {
  onUpdate?: (messages: ChatMessage[], pending: PendingMessage[]) => void;
  onError?: (err: unknown) => void;
}

/**
 * One chat room's client state: a single long-poll loop on `after=<last
 * seq>` plus optimistic local echoes. The server assigns a dense sequence
 * number to every message, so rendering in seq order makes all clients
 * converge to the same transcript; an own pending message is shown
 * immediately and reconciled away when it comes back with its seq.
 */
export class ChatRoom {
  private messages = new Map<number, ChatMessage>();
  private pending: PendingMessage[] = [];
  private nextLocalId = 1;
  private running = false;
  private lastSeq = 0;

  constructor(
    private readonly api: ApiClient,
    readonly room: string,
    private readonly callbacks: ChatCallbacks = {},
    private readonly waitSeconds = 25,
  ) {}

  transcript(): ChatMessage[] {
    return [...this.messages.values()].sort((a, b) => a.seq - b.seq);
  }

  pendingEchoes(): PendingMessage[] {
    return [...this.pending];
  }

  start(): void {
    if (this.running) return;
    this.running = true;
    void this.loop();
  }

  stop(): void {
    this.running = false;
  }

  /** Run long-polls until stopped; a timeout with no news just re-polls. */
  private async loop(): Promise<void> {
    while (this.running) {
      try {
        const batch = await this.api.chatFetch(this.room, this.lastSeq, this.waitSeconds);
        if (batch.length > 0) this.ingest(batch);
      } catch (err) {
        this.callbacks.onError?.(err);
        this.stop();
      }
    }
  }

  async post(body: string): Promise<void> {
    const echo: PendingMessage = { localId: this.nextLocalId++, body };
    this.pending.push(echo);
    this.notify();
    try {
      const confirmed = await this.api.chatPost(this.room, body);
      this.pending = this.pending.filter((p) => p.localId !== echo.localId);
      // don't advance lastSeq here: messages posted by others between our
      // last poll and this confirmation would be skipped; the poll dedupes
      this.ingest([confirmed], false);
    } catch (err) {
      this.pending = this.pending.filter((p) => p.localId !== echo.localId);
      this.notify();
      throw err;
    }
  }

  private ingest(batch: ChatMessage[], advance = true): void {
    for (const message of batch) {
      this.messages.set(message.seq, message);
      if (advance && message.seq > this.lastSeq) this.lastSeq = message.seq;
    }
    this.notify();
  }

  private notify(): void {
    this.callbacks.onUpdate?.(this.transcript(), this.pendingEchoes());
  }
}
