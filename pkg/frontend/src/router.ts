import type { RoleName } from './types';

export type Screen =
  | 'Login'
  | 'Home'
  | 'Courses'
  | 'Messages'
  | 'Classmates'
  | 'ExamsQuizzes'
  | 'Assignments'
  | 'Timetable'
  | 'Library'
  | 'Downloads'
  | 'Syllabus'
  | 'Lecturers'
  | 'Notices'
  | 'Lectures'
  | 'Chat'
  | 'Results'
  | 'RegistryAdmin'
  | 'LecturerAuthoring'
  | 'Reports';

export interface PortalRoute {
  path: string;
  portal: RoleName;
  screen: Screen;
}

/**
 * Navigation checklist: every screen a portal offers, reachable from that
 * portal's Home. The router renders nothing the API would not authorize —
 * all data on a screen comes from calls made with the session's own token.
 */
export const PORTAL_ROUTES: PortalRoute[] = [
  // student portal
  { path: '#/student/home', portal: 'Student', screen: 'Home' },
  { path: '#/student/courses', portal: 'Student', screen: 'Courses' },
  { path: '#/student/messages', portal: 'Student', screen: 'Messages' },
  { path: '#/student/classmates', portal: 'Student', screen: 'Classmates' },
  { path: '#/student/exams', portal: 'Student', screen: 'ExamsQuizzes' },
  { path: '#/student/assignments', portal: 'Student', screen: 'Assignments' },
  { path: '#/student/timetable', portal: 'Student', screen: 'Timetable' },
  { path: '#/student/library', portal: 'Student', screen: 'Library' },
  { path: '#/student/downloads', portal: 'Student', screen: 'Downloads' },
  { path: '#/student/syllabus', portal: 'Student', screen: 'Syllabus' },
  { path: '#/student/lecturers', portal: 'Student', screen: 'Lecturers' },
  { path: '#/student/notices', portal: 'Student', screen: 'Notices' },
  { path: '#/student/lectures', portal: 'Student', screen: 'Lectures' },
  { path: '#/student/chat', portal: 'Student', screen: 'Chat' },
  { path: '#/student/results', portal: 'Student', screen: 'Results' },
  // lecturer portal
  { path: '#/lecturer/home', portal: 'Lecturer', screen: 'Home' },
  { path: '#/lecturer/courses', portal: 'Lecturer', screen: 'Courses' },
  { path: '#/lecturer/authoring', portal: 'Lecturer', screen: 'LecturerAuthoring' },
  { path: '#/lecturer/messages', portal: 'Lecturer', screen: 'Messages' },
  { path: '#/lecturer/notices', portal: 'Lecturer', screen: 'Notices' },
  { path: '#/lecturer/library', portal: 'Lecturer', screen: 'Library' },
  { path: '#/lecturer/chat', portal: 'Lecturer', screen: 'Chat' },
  { path: '#/lecturer/reports', portal: 'Lecturer', screen: 'Reports' },
  // registry portal
  { path: '#/registry/home', portal: 'Registrar', screen: 'Home' },
  { path: '#/registry/admin', portal: 'Registrar', screen: 'RegistryAdmin' },
  { path: '#/registry/messages', portal: 'Registrar', screen: 'Messages' },
  { path: '#/registry/notices', portal: 'Registrar', screen: 'Notices' },
  { path: '#/registry/library', portal: 'Registrar', screen: 'Library' },
  { path: '#/registry/reports', portal: 'Registrar', screen: 'Reports' },
];

export function homeFor(role: RoleName): string {
  switch (role) {
    case 'Student':
      return '#/student/home';
    case 'Lecturer':
      return '#/lecturer/home';
    case 'Registrar':
      return '#/registry/home';
  }
}

export function routesFor(role: RoleName): PortalRoute[] {
  return PORTAL_ROUTES.filter((r) => r.portal === role);
}

export function findRoute(path: string): PortalRoute | undefined {
  return PORTAL_ROUTES.find((r) => r.path === path);
}
