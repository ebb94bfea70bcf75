// Keeps a dashboard current while colleagues enter observations elsewhere.

export class Poller {
  private timer: ReturnType<typeof setInterval> | undefined;

  constructor(private intervalMs = 5000) {}

  start(tick: () => Promise<void>): void {
    this.stop();
    this.timer = setInterval(() => {
      tick().catch((err) => console.error("poll failed:", err));
    }, this.intervalMs);
  }

  stop(): void {
    if (this.timer !== undefined) {
      clearInterval(this.timer);
      this.timer = undefined;
    }
  }

  get running(): boolean {
    return this.timer !== undefined;
  }
}
