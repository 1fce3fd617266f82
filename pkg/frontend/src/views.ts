import { ApiClient, friendlyMessage } from './api';
import type { PortalRoute } from './router';
import { routesFor } from './router';
import { QuizRunner, formatCountdown, quizAvailability } from './quiz';
import { ChatRoom } from './chat';
import type { Assessment } from './types';

// Tiny DOM helper; enough structure for tests and a usable plain UI.
export function el(
  tag: string,
  attrs: Record<string, string> = {},
  children: Array<Node | string> = [],
): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  for (const child of children) {
    node.append(typeof child === 'string' ? document.createTextNode(child) : child);
  }
  return node;
}

export function errorBanner(err: unknown): HTMLElement {
  return el('div', { class: 'banner error', role: 'alert' }, [friendlyMessage(err)]);
}

/** The login form: two inputs, one generic denial banner on any failure. */
export function renderLogin(api: ApiClient, onSuccess: (home: string) => void): HTMLElement {
  const username = el('input', { name: 'username', placeholder: 'Username' }) as HTMLInputElement;
  const password = el('input', {
    name: 'password',
    type: 'password',
    placeholder: 'Password',
  }) as HTMLInputElement;
  const status = el('div', { class: 'login-status' });
  const form = el('form', { class: 'login' }, [
    el('h1', {}, ['Citadel']),
    username,
    password,
    el('button', { type: 'submit' }, ['Log in']),
    status,
  ]);
  form.addEventListener('submit', (event) => {
    event.preventDefault();
    void api.login(username.value, password.value).then(
      (session) => {
        const home =
          session.role === 'Student'
            ? '#/student/home'
            : session.role === 'Lecturer'
              ? '#/lecturer/home'
              : '#/registry/home';
        onSuccess(home);
      },
      (err) => {
        status.replaceChildren(errorBanner(err));
      },
    );
  });
  return form;
}

function navTiles(route: PortalRoute, navigate: (path: string) => void): HTMLElement {
  const tiles = routesFor(route.portal)
    .filter((r) => r.screen !== 'Home')
    .map((r) => {
      const tile = el('a', { class: 'tile', href: r.path, 'data-screen': r.screen }, [r.screen]);
      tile.addEventListener('click', (event) => {
        event.preventDefault();
        navigate(r.path);
      });
      return tile;
    });
  return el('nav', { class: 'tiles' }, tiles);
}

function table(headers: string[], rows: string[][]): HTMLElement {
  return el('table', {}, [
    el('thead', {}, [el('tr', {}, headers.map((h) => el('th', {}, [h])))]),
    el(
      'tbody',
      {},
      rows.map((cells) => el('tr', {}, cells.map((c) => el('td', {}, [c])))),
    ),
  ]);
}

export interface ViewContext {
  api: ApiClient;
  navigate: (path: string) => void;
  /** injectable for countdown tests */
  now?: () => number;
}

/**
 * Render one portal screen. Every screen fetches with the session's own
 * token and nothing else, so whatever appears is exactly what the API
 * authorized.
 */
export async function renderScreen(route: PortalRoute, ctx: ViewContext): Promise<HTMLElement> {
  const { navigate } = ctx;
  const root = el('section', { class: 'screen', 'data-screen': route.screen });
  const heading = route.screen === 'Home' ? `${route.portal} portal` : route.screen;
  root.append(el('h2', {}, [heading]));
  try {
    root.append(await screenBody(route, ctx));
  } catch (err) {
    root.append(errorBanner(err));
  }
  if (route.screen === 'Home') root.append(navTiles(route, navigate));
  return root;
}

async function screenBody(route: PortalRoute, ctx: ViewContext): Promise<HTMLElement> {
  const { api } = ctx;
  switch (route.screen) {
    case 'Home': {
      const who = api.session;
      return el('p', { class: 'welcome' }, [`Welcome, ${who?.full_name ?? 'stranger'}.`]);
    }
    case 'Courses': {
      const courses =
        route.portal === 'Student' ? await api.myCourses() : await api.listCourses();
      return table(
        ['Code', 'Title', 'Session'],
        courses.map((c) => [c.code, c.title, c.session]),
      );
    }
    case 'Messages': {
      const inbox = await api.listMessages();
      return table(
        ['From', 'Subject', 'Sent', 'Read'],
        inbox.map((m) => [m.from_user, m.subject, m.sent_at, m.read ? 'yes' : 'no']),
      );
    }
    case 'Classmates': {
      const courses = await api.myCourses();
      const wrap = el('div', { class: 'classmates' });
      for (const course of courses) {
        const mates = await api.myClassmates(course.code);
        wrap.append(
          el('h3', {}, [course.code]),
          table(
            ['Name', 'Matric', 'Email'],
            mates.map((m) => [m.full_name, m.matric, m.email]),
          ),
        );
      }
      return wrap;
    }
    case 'ExamsQuizzes':
      return examList(ctx);
    case 'Assignments': {
      const courses = await api.myCourses();
      const rows: string[][] = [];
      for (const course of courses) {
        for (const hw of await api.listAssignments(course.code)) {
          rows.push([course.code, hw.title, hw.due_at, String(hw.max_score)]);
        }
      }
      return table(['Course', 'Title', 'Due', 'Max score'], rows);
    }
    case 'Timetable': {
      const today = new Date(ctx.now ? ctx.now() : Date.now()).toISOString().slice(0, 10);
      const entries = await api.myTimetable(today);
      return table(
        ['Start', 'End', 'Course', 'Activity', 'Venue'],
        entries.map((e) => [e.start, e.end, e.course_code, e.activity, e.venue]),
      );
    }
    case 'Library': {
      const books = await api.searchLibrary('');
      return table(
        ['Title', 'Author', 'Location'],
        books.map((b) => [b.title, b.author, b.location]),
      );
    }
    case 'Downloads':
    case 'Lectures': {
      // the download centre and the lecture-materials screen differ only in
      // which content kinds they surface
      const courses =
        route.portal === 'Student' ? await api.myCourses() : await api.listCourses();
      const wrap = el('div', { class: 'materials' });
      for (const course of courses) {
        const items = await api.listMaterials(course.code);
        wrap.append(
          el('h3', {}, [course.code]),
          el(
            'ul',
            {},
            items.map((item) =>
              el('li', { 'data-content-id': item.id }, [
                el('a', { href: ctx.api.downloadUrl(item.id) }, [item.filename]),
                ` (${item.size_bytes} bytes)`,
              ]),
            ),
          ),
        );
      }
      return wrap;
    }
    case 'Syllabus': {
      const courses = await api.myCourses();
      const wrap = el('div', { class: 'syllabus' });
      for (const course of courses) {
        const syllabus = await api.viewSyllabus(course.code);
        wrap.append(
          el('h3', {}, [course.code]),
          el('ol', {}, syllabus.topics.map((t) => el('li', {}, [t]))),
        );
      }
      return wrap;
    }
    case 'Lecturers': {
      const rows = await api.myLecturers();
      return table(
        ['Name', 'Staff ID', 'Courses'],
        rows.map((r) => [r.full_name, r.staff_id, r.courses.join(', ')]),
      );
    }
    case 'Notices': {
      const notices = await api.listNotices();
      return el(
        'div',
        { class: 'notices' },
        notices.map((n) =>
          el('article', {}, [el('h3', {}, [n.title]), el('p', {}, [n.body])]),
        ),
      );
    }
    case 'Chat':
      return chatScreen(ctx, route);
    case 'Results': {
      const rows = await api.myResults();
      return table(
        ['Course', 'CA', 'Exam', 'Total', 'Grade'],
        rows.map((r) => [
          r.course_code,
          String(r.ca_score),
          String(r.exam_score),
          String(r.total),
          r.letter,
        ]),
      );
    }
    case 'RegistryAdmin': {
      const courses = await api.listCourses();
      return el('div', { class: 'registry-admin' }, [
        el('p', {}, ['Faculties, departments, people, courses, enrollments.']),
        table(
          ['Code', 'Title', 'Session'],
          courses.map((c) => [c.code, c.title, c.session]),
        ),
      ]);
    }
    case 'LecturerAuthoring': {
      const courses = await api.listCourses();
      return el('div', { class: 'authoring' }, [
        el('p', {}, ['Upload materials, set syllabi, author quizzes and assignments.']),
        el('ul', {}, courses.map((c) => el('li', {}, [`${c.code} — ${c.title}`]))),
      ]);
    }
    case 'Reports': {
      const courses = await api.listCourses();
      const wrap = el('div', { class: 'reports' });
      for (const course of courses) {
        try {
          const report = await api.report(course.code);
          wrap.append(
            el('h3', {}, [course.code]),
            table(
              ['Matric', 'Name', 'CA', 'Exam', 'Total', 'Grade'],
              report.rows.map((r) => [
                r.matric,
                r.name,
                String(r.ca_score),
                String(r.exam_score),
                String(r.total),
                r.letter,
              ]),
            ),
          );
        } catch {
          // a lecturer only sees reports for courses they own
        }
      }
      return wrap;
    }
    case 'Login':
      throw new Error('login renders outside the portal shell');
  }
}

async function examList(ctx: ViewContext): Promise<HTMLElement> {
  const now = ctx.now ? ctx.now() : Date.now();
  const courses = await ctx.api.myCourses();
  const wrap = el('div', { class: 'assessments' });
  for (const course of courses) {
    const list = await ctx.api.listAssessments(course.code);
    wrap.append(
      el('h3', {}, [course.code]),
      el(
        'ul',
        {},
        list.map((a) => {
          const state = quizAvailability(a, now);
          const item = el('li', { 'data-assessment-id': a.id, 'data-state': state }, [
            `${a.kind}: ${a.title} — ${state}`,
          ]);
          if (state === 'open') {
            const start = el('button', {}, ['Start']);
            start.addEventListener('click', () => void openQuiz(ctx, a, item));
            item.append(' ', start);
          }
          return item;
        }),
      ),
    );
  }
  return wrap;
}

async function openQuiz(ctx: ViewContext, assessment: Assessment, host: HTMLElement): Promise<void> {
  try {
    const attempt = await ctx.api.startAttempt(assessment.id);
    host.replaceChildren(renderQuizAttempt(ctx, assessment, attempt));
  } catch (err) {
    host.replaceChildren(errorBanner(err));
  }
}

export function renderQuizAttempt(
  ctx: ViewContext,
  assessment: Assessment,
  attempt: import('./types').Attempt,
): HTMLElement {
  const countdown = el('div', { class: 'countdown', 'aria-live': 'polite' });
  const status = el('div', { class: 'quiz-status' });
  const submit = el('button', { class: 'submit' }, ['Submit']) as HTMLButtonElement;
  const runner = new QuizRunner(
    ctx.api,
    assessment,
    attempt,
    {
      onTick: (s) => {
        countdown.textContent = formatCountdown(s);
      },
      onPhase: (phase, final) => {
        submit.disabled = true;
        status.textContent =
          phase === 'submitted' && final
            ? `Submitted. Score: ${final.auto_score}`
            : 'Time is up — your saved answers were submitted.';
      },
    },
    ctx.now,
  );
  const questions = assessment.questions.map((q, qi) =>
    el('fieldset', {}, [
      el('legend', {}, [q.prompt]),
      ...q.options.map((opt, oi) => {
        const radio = el('input', {
          type: 'radio',
          name: `q${qi}`,
          value: String(oi),
        }) as HTMLInputElement;
        radio.addEventListener('change', () => runner.answer(qi, oi));
        return el('label', {}, [radio, opt]);
      }),
    ]),
  );
  submit.addEventListener('click', () => void runner.submit());
  return el('div', { class: 'quiz' }, [countdown, ...questions, submit, status]);
}

function chatScreen(ctx: ViewContext, route: PortalRoute): HTMLElement {
  const wrap = el('div', { class: 'chat' });
  const log = el('ul', { class: 'chat-log' });
  const input = el('input', { placeholder: 'Say something' }) as HTMLInputElement;
  const send = el('button', {}, ['Send']);
  const picker = el('select', {}) as HTMLSelectElement;
  let roomClient: ChatRoom | null = null;

  const join = (room: string) => {
    roomClient?.stop();
    roomClient = new ChatRoom(ctx.api, room, {
      onUpdate: (messages, pending) => {
        log.replaceChildren(
          ...messages.map((m) => el('li', { 'data-seq': String(m.seq) }, [m.body])),
          ...pending.map((p) => el('li', { class: 'pending' }, [p.body])),
        );
      },
      onError: (err) => wrap.append(errorBanner(err)),
    });
    roomClient.start();
  };

  void (route.portal === 'Student' ? ctx.api.myCourses() : ctx.api.listCourses()).then(
    (courses) => {
      for (const course of courses) {
        picker.append(el('option', { value: course.code }, [course.code]));
      }
      if (courses.length > 0) join(courses[0].code);
    },
  );
  picker.addEventListener('change', () => join(picker.value));
  send.addEventListener('click', () => {
    if (input.value.trim()) {
      void roomClient?.post(input.value).catch((err) => wrap.append(errorBanner(err)));
      input.value = '';
    }
  });
  wrap.append(picker, log, input, send);
  return wrap;
}
